#include "weylspec/propagator.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/QR>

namespace weylspec {

namespace {

namespace dp {
constexpr double c2 = 0.526001519587677318785587544488e-01;
constexpr double c3 = 0.789002279381515978178381316732e-01;
constexpr double c4 = 0.118350341907227396726757197510e+00;
constexpr double c5 = 0.281649658092772603273242802490e+00;
constexpr double c6 = 0.333333333333333333333333333333e+00;
constexpr double c7 = 0.25e+00;
constexpr double c8 = 0.307692307692307692307692307692e+00;
constexpr double c9 = 0.651282051282051282051282051282e+00;
constexpr double c10 = 0.6e+00;
constexpr double c11 = 0.857142857142857142857142857142e+00;

constexpr double a21 = 5.26001519587677318785587544488e-2;
constexpr double a31 = 1.97250569845378994544595329183e-2;
constexpr double a32 = 5.91751709536136983633785987549e-2;
constexpr double a41 = 2.95875854768068491816892993775e-2;
constexpr double a43 = 8.87627564304205475450678981324e-2;
constexpr double a51 = 2.41365134159266685502369798665e-1;
constexpr double a53 = -8.84549479328286085344864962717e-1;
constexpr double a54 = 9.24834003261792003115737966543e-1;
constexpr double a61 = 3.7037037037037037037037037037e-2;
constexpr double a64 = 1.70828608729473871279604482173e-1;
constexpr double a65 = 1.25467687566822425016691814123e-1;
constexpr double a71 = 3.7109375e-2;
constexpr double a74 = 1.70252211019544039314978060272e-1;
constexpr double a75 = 6.02165389804559606850219397283e-2;
constexpr double a76 = -1.7578125e-2;
constexpr double a81 = 3.70920001185047927108779319836e-2;
constexpr double a84 = 1.70383925712239993810214054705e-1;
constexpr double a85 = 1.07262030446373284651809199168e-1;
constexpr double a86 = -1.53194377486244017527936158236e-2;
constexpr double a87 = 8.27378916381402288758473766002e-3;
constexpr double a91 = 6.24110958716075717114429577812e-1;
constexpr double a94 = -3.36089262944694129406857109825e0;
constexpr double a95 = -8.68219346841726006818189891453e-1;
constexpr double a96 = 2.75920996994467083049415600797e1;
constexpr double a97 = 2.01540675504778934086186788979e1;
constexpr double a98 = -4.34898841810699588477366255144e1;
constexpr double a101 = 4.77662536438264365890433908527e-1;
constexpr double a104 = -2.48811461997166764192642586468e0;
constexpr double a105 = -5.90290826836842996371446475743e-1;
constexpr double a106 = 2.12300514481811942347288949897e1;
constexpr double a107 = 1.52792336328824235832596922938e1;
constexpr double a108 = -3.32882109689848629194453265587e1;
constexpr double a109 = -2.03312017085086261358222928593e-2;
constexpr double a111 = -9.3714243008598732571704021658e-1;
constexpr double a114 = 5.18637242884406370830023853209e0;
constexpr double a115 = 1.09143734899672957818500254654e0;
constexpr double a116 = -8.14978701074692612513997267357e0;
constexpr double a117 = -1.85200656599969598641566180701e1;
constexpr double a118 = 2.27394870993505042818970056734e1;
constexpr double a119 = 2.49360555267965238987089396762e0;
constexpr double a1110 = -3.0467644718982195003823669022e0;
constexpr double a121 = 2.27331014751653820792359768449e0;
constexpr double a124 = -1.05344954667372501984066689879e1;
constexpr double a125 = -2.00087205822486249909675718444e0;
constexpr double a126 = -1.79589318631187989172765950534e1;
constexpr double a127 = 2.79488845294199600508499808837e1;
constexpr double a128 = -2.85899827713502369474065508674e0;
constexpr double a129 = -8.87285693353062954433549289258e0;
constexpr double a1210 = 1.23605671757943030647266201528e1;
constexpr double a1211 = 6.43392746015763530355970484046e-1;

constexpr double b1 = 5.42937341165687622380535766363e-2;
constexpr double b6 = 4.45031289275240888144113950566e0;
constexpr double b7 = 1.89151789931450038304281599044e0;
constexpr double b8 = -5.8012039600105847814672114227e0;
constexpr double b9 = 3.1116436695781989440891606237e-1;
constexpr double b10 = -1.52160949662516078556178806805e-1;
constexpr double b11 = 2.01365400804030348374776537501e-1;
constexpr double b12 = 4.47106157277725905176885569043e-2;

constexpr double e31 = 0.244094488188976377952755905512e+00;
constexpr double e32 = 0.733846688281611857341361741547e+00;
constexpr double e33 = 0.220588235294117647058823529412e-01;

constexpr double e51 = 0.1312004499419488073250102996e-01;
constexpr double e56 = -0.1225156446376204440720569753e+01;
constexpr double e57 = -0.4957589496572501915214079952e+00;
constexpr double e58 = 0.1664377182454986536961530415e+01;
constexpr double e59 = -0.3503288487499736816886487290e+00;
constexpr double e510 = 0.3341791187130174790297318841e+00;
constexpr double e511 = 0.8192320648511571246570742613e-01;
constexpr double e512 = -0.2235530786388629525884427845e-01;
}  // namespace dp

constexpr double beta = 0.04;
constexpr double expo = 1.0 / 8.0 - beta * 0.2;
constexpr double safety = 0.9;
constexpr double min_scale = 0.333;
constexpr double max_scale = 6.0;

}  // namespace

IntegratorOptions IntegratorOptions::from_tol(double tol) {
    if (!(tol > 0)) throw PreconditionError("integration tolerance must be positive");
    IntegratorOptions o;
    o.rtol = tol;
    o.atol = tol * 1e-2;
    return o;
}

IntegrationStats Dop853::integrate(const Rhs& f, double x0, double x1, CMatrix& Y, const StepHook& hook) const {
    using namespace dp;
    IntegrationStats stats;
    if (x1 == x0) return stats;
    if (!(opt_.rtol > 0) || !(opt_.atol > 0)) throw PreconditionError("integration tolerances must be positive");

    const double dir = x1 > x0 ? 1.0 : -1.0;
    const double span = std::abs(x1 - x0);
    const auto n = static_cast<double>(Y.size());

    CMatrix k1(Y.rows(), Y.cols()), k2 = k1, k3 = k1, k4 = k1, k5 = k1, k6 = k1, k7 = k1, k8 = k1, k9 = k1,
        k10 = k1, yw = k1, ynew = k1;

    f(x0, Y, k1);
    stats.evaluations = 1;

    // Initial step from the derivative scale, as in the classical starting-step heuristic.
    double h;
    {
        double d0 = 0, d1 = 0;
        for (Eigen::Index i = 0; i < Y.size(); ++i) {
            const double sc = opt_.atol + opt_.rtol * std::abs(Y(i));
            d0 += std::norm(Y(i)) / (sc * sc);
            d1 += std::norm(k1(i)) / (sc * sc);
        }
        d0 = std::sqrt(d0 / n);
        d1 = std::sqrt(d1 / n);
        h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h = std::min(h, span);
    }

    double x = x0;
    double facold = 1e-4;
    bool last_rejected = false;

    while (dir * (x1 - x) > 0) {
        if (stats.accepted + stats.rejected >= opt_.max_steps)
            throw IntegrationError("step budget exhausted", x);
        if (h < 1e-14 * std::max(1.0, std::abs(x))) throw IntegrationError("step size underflow", x);
        bool final_step = false;
        if (h >= std::abs(x1 - x)) {
            h = std::abs(x1 - x);
            final_step = true;
        }
        const double hs = dir * h;

        yw = Y + hs * (a21 * k1);
        f(x + c2 * hs, yw, k2);
        yw = Y + hs * (a31 * k1 + a32 * k2);
        f(x + c3 * hs, yw, k3);
        yw = Y + hs * (a41 * k1 + a43 * k3);
        f(x + c4 * hs, yw, k4);
        yw = Y + hs * (a51 * k1 + a53 * k3 + a54 * k4);
        f(x + c5 * hs, yw, k5);
        yw = Y + hs * (a61 * k1 + a64 * k4 + a65 * k5);
        f(x + c6 * hs, yw, k6);
        yw = Y + hs * (a71 * k1 + a74 * k4 + a75 * k5 + a76 * k6);
        f(x + c7 * hs, yw, k7);
        yw = Y + hs * (a81 * k1 + a84 * k4 + a85 * k5 + a86 * k6 + a87 * k7);
        f(x + c8 * hs, yw, k8);
        yw = Y + hs * (a91 * k1 + a94 * k4 + a95 * k5 + a96 * k6 + a97 * k7 + a98 * k8);
        f(x + c9 * hs, yw, k9);
        yw = Y + hs * (a101 * k1 + a104 * k4 + a105 * k5 + a106 * k6 + a107 * k7 + a108 * k8 + a109 * k9);
        f(x + c10 * hs, yw, k10);
        yw = Y + hs * (a111 * k1 + a114 * k4 + a115 * k5 + a116 * k6 + a117 * k7 + a118 * k8 + a119 * k9 +
                       a1110 * k10);
        f(x + c11 * hs, yw, k2);
        yw = Y + hs * (a121 * k1 + a124 * k4 + a125 * k5 + a126 * k6 + a127 * k7 + a128 * k8 + a129 * k9 +
                       a1210 * k10 + a1211 * k2);
        f(x + hs, yw, k3);
        stats.evaluations += 11;

        k4 = b1 * k1 + b6 * k6 + b7 * k7 + b8 * k8 + b9 * k9 + b10 * k10 + b11 * k2 + b12 * k3;
        ynew = Y + hs * k4;

        double err3 = 0, err5 = 0;
        for (Eigen::Index i = 0; i < Y.size(); ++i) {
            const double sc = opt_.atol + opt_.rtol * std::max(std::abs(Y(i)), std::abs(ynew(i)));
            const cplx e3 = k4(i) - e31 * k1(i) - e32 * k9(i) - e33 * k3(i);
            const cplx e5 = e51 * k1(i) + e56 * k6(i) + e57 * k7(i) + e58 * k8(i) + e59 * k9(i) + e510 * k10(i) +
                            e511 * k2(i) + e512 * k3(i);
            err3 += std::norm(e3) / (sc * sc);
            err5 += std::norm(e5) / (sc * sc);
        }
        const double denom = err5 + 0.01 * err3;
        const double err = denom > 0 ? h * err5 / std::sqrt(n * denom) : 0.0;

        if (!std::isfinite(err)) throw IntegrationError("non-finite error estimate", x);

        const double fac11 = std::pow(err, expo);
        if (err <= 1.0) {
            double scale = err == 0.0 ? max_scale : safety / (fac11 / std::pow(facold, beta));
            scale = std::clamp(scale, min_scale, max_scale);
            if (last_rejected) scale = std::min(scale, 1.0);
            facold = std::max(err, 1e-4);
            stats.error_estimate += err * opt_.rtol * std::max(1.0, ynew.cwiseAbs().maxCoeff());
            ++stats.accepted;
            x = final_step ? x1 : x + hs;
            Y.swap(ynew);
            if (hook) hook(x, Y);
            if (dir * (x1 - x) > 0) {
                f(x, Y, k1);
                ++stats.evaluations;
            }
            h *= scale;
            last_rejected = false;
        } else {
            h *= std::max(min_scale, safety / fac11);
            ++stats.rejected;
            last_rejected = true;
        }
    }
    return stats;
}

Dop853::Rhs schrodinger_rhs(const PotentialSpec& Q, cplx z) {
    const int m = Q.dimension();
    return [Q, z, m](double x, const CMatrix& Y, CMatrix& out) {
        thread_local CMatrix q;
        Q.evaluate_into(x, 0, q);
        out.topRows(m) = Y.bottomRows(m);
        out.bottomRows(m).noalias() = q * Y.topRows(m);
        out.bottomRows(m) -= z * Y.topRows(m);
    };
}

FundamentalSystem integrate_fundamental(const PotentialSpec& Q, cplx z, double x0, double x,
                                        const IntegratorOptions& options) {
    const int m = Q.dimension();
    FundamentalSystem fs;
    fs.z = z;
    fs.x0 = x0;
    fs.x = x;
    fs.Psi = CMatrix::Identity(2 * m, 2 * m);
    const auto stats = Dop853(options).integrate(schrodinger_rhs(Q, z), x0, x, fs.Psi);
    fs.error_estimate = stats.error_estimate;
    return fs;
}

Eigen::VectorXd FrameTransport::log_growth() const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(frame.cols());
    for (const auto& r : log)
        for (Eigen::Index j = 0; j < g.size(); ++j) g(j) += std::log(std::abs(r.R(j, j)));
    return g;
}

namespace {

void renormalize(CMatrix& Y, double x, std::vector<Renormalization>& log) {
    Eigen::HouseholderQR<CMatrix> qr(Y);
    const Eigen::Index k = Y.cols();
    CMatrix R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    CMatrix Qthin = qr.householderQ() * CMatrix::Identity(Y.rows(), k);
    // Fix the phase so that diag(R) is real positive.
    for (Eigen::Index j = 0; j < k; ++j) {
        const double a = std::abs(R(j, j));
        if (a == 0.0 || !std::isfinite(a)) throw ComputationError("frame lost full column rank at x = " + std::to_string(x));
        const cplx phase = R(j, j) / a;
        R.row(j) *= std::conj(phase);
        Qthin.col(j) *= phase;
    }
    const double smallest = R.diagonal().cwiseAbs().minCoeff();
    const double largest = R.diagonal().cwiseAbs().maxCoeff();
    if (smallest < 1e-13 * largest)
        throw ComputationError("frame lost full column rank at x = " + std::to_string(x));
    Y = Qthin;
    log.push_back({x, std::move(R)});
}

}  // namespace

FrameTransport propagate_frame(const PotentialSpec& Q, cplx z, double x0, double x1, const CMatrix& frame,
                               const IntegratorOptions& options) {
    const int m = Q.dimension();
    if (frame.rows() != 2 * m || frame.cols() < 1) throw PreconditionError("frame must have 2m rows");
    FrameTransport out;
    out.frame = frame;
    if (x1 == x0) return out;
    {
        Eigen::ColPivHouseholderQR<CMatrix> qr(frame);
        if (qr.rank() < frame.cols()) throw PreconditionError("frame does not have full column rank");
    }
    auto hook = [&out](double x, CMatrix& Y) {
        const Eigen::VectorXd norms = Y.colwise().norm();
        if (norms.maxCoeff() > 8.0 || norms.minCoeff() < 0.125) {
            renormalize(Y, x, out.log);
            return true;
        }
        return false;
    };
    Dop853(options).integrate(schrodinger_rhs(Q, z), x0, x1, out.frame, hook);
    renormalize(out.frame, x1, out.log);
    return out;
}

}  // namespace weylspec
