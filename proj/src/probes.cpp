#include "netscope/probes.hpp"

#include "netscope/error.hpp"
#include "netscope/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

namespace netscope {

namespace {

struct Encoded {
    Matrix y;                 // n x C one-hot (class) or n x t (real)
    std::vector<int> labels;  // class index per sample (class only)
    int classes = 0;
};

Encoded encode(const Targets& target, Eigen::Index n) {
    if (target.values.rows() != n)
        throw InputError("targets have " + std::to_string(target.values.rows()) +
                         " rows but the bundle has " + std::to_string(n) + " samples");
    Encoded e;
    if (target.kind == TargetKind::Real) {
        e.y = target.values;
        return e;
    }
    std::set<long long> distinct;
    for (Eigen::Index i = 0; i < n; ++i) distinct.insert(std::llround(target.values(i, 0)));
    if (distinct.size() < 2) throw InputError("single-class target");
    const std::vector<long long> codes(distinct.begin(), distinct.end());
    e.classes = static_cast<int>(codes.size());
    e.y = Matrix::Zero(n, e.classes);
    e.labels.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto it = std::lower_bound(codes.begin(), codes.end(), std::llround(target.values(i, 0)));
        const int c = static_cast<int>(it - codes.begin());
        e.labels[static_cast<std::size_t>(i)] = c;
        e.y(i, c) = 1.0;
    }
    return e;
}

int argmax_row(const Matrix& m, Eigen::Index r) {
    Eigen::Index best = 0;
    m.row(r).maxCoeff(&best);
    return static_cast<int>(best);
}

double accuracy_of(const Matrix& scores, const std::vector<int>& labels,
                   const std::vector<Eigen::Index>& rows) {
    std::size_t hits = 0;
    for (Eigen::Index r = 0; r < scores.rows(); ++r)
        if (argmax_row(scores, r) == labels[static_cast<std::size_t>(rows[static_cast<std::size_t>(r)])]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(scores.rows());
}

void rank(ProbeReport& report) {
    std::vector<int> order(report.records.size());
    std::iota(order.begin(), order.end(), 0);
    const auto& rec = report.records;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const auto& ra = rec[static_cast<std::size_t>(a)];
        const auto& rb = rec[static_cast<std::size_t>(b)];
        if (ra.accuracy && rb.accuracy && *ra.accuracy != *rb.accuracy)
            return *ra.accuracy > *rb.accuracy;
        if (ra.fit_error != rb.fit_error) return ra.fit_error < rb.fit_error;
        return ra.layer_id < rb.layer_id;
    });
    report.ranking.clear();
    for (int i : order) report.ranking.push_back(rec[static_cast<std::size_t>(i)].layer_id);

    report.top_similar.clear();
    if (rec.empty()) return;
    const auto& best = rec[static_cast<std::size_t>(order.front())];
    for (int i : order) {
        const auto& r = rec[static_cast<std::size_t>(i)];
        const bool close_err = r.fit_error <= best.fit_error * (1.0 + kTopSimilarTolerance) + 1e-12;
        const bool close_acc =
            !r.accuracy || !best.accuracy || *r.accuracy >= *best.accuracy * (1.0 - kTopSimilarTolerance);
        if (best.accuracy ? close_acc : close_err) report.top_similar.push_back(r.layer_id);
    }
}

ProbeReport make_report(const ActivationBundle& bundle, ProbeKind kind, TargetKind tk) {
    ProbeReport report;
    report.kind = kind;
    report.target_kind = tk;
    for (const auto& layer : bundle.layers) report.records.push_back({layer.layer_id, layer.name, 0.0, {}});
    return report;
}

// --- MLP -----------------------------------------------------------------

struct Adam {
    Matrix m, v;
    explicit Adam(Eigen::Index r, Eigen::Index c) : m(Matrix::Zero(r, c)), v(Matrix::Zero(r, c)) {}

    void step(Matrix& param, const Matrix& grad, double lr, int t) {
        constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        m = b1 * m + (1 - b1) * grad;
        v = b2 * v + (1 - b2) * grad.cwiseProduct(grad);
        const double c1 = 1 - std::pow(b1, t);
        const double c2 = 1 - std::pow(b2, t);
        param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
    }
};

struct Mlp {
    Matrix w1, b1, w2, b2;  // b1: 1 x h, b2: 1 x C

    Matrix hidden(const Matrix& x) const {
        return ((x * w1).rowwise() + b1.row(0)).cwiseMax(0.0);
    }
    Matrix probabilities(const Matrix& x) const {
        Matrix z = (hidden(x) * w2).rowwise() + b2.row(0);
        for (Eigen::Index r = 0; r < z.rows(); ++r) {
            const double mx = z.row(r).maxCoeff();
            z.row(r) = (z.row(r).array() - mx).exp();
            z.row(r) /= z.row(r).sum();
        }
        return z;
    }
};

Matrix glorot(Eigen::Index fan_in, Eigen::Index fan_out, std::mt19937_64& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> u(-bound, bound);
    Matrix w(fan_in, fan_out);
    for (Eigen::Index j = 0; j < fan_out; ++j)
        for (Eigen::Index i = 0; i < fan_in; ++i) w(i, j) = u(rng);
    return w;
}

Mlp train_mlp(const Matrix& x, const Matrix& y, const MlpProbeConfig& cfg, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const Eigen::Index d = x.cols(), h = cfg.hidden, c = y.cols(), n = x.rows();
    Mlp net{glorot(d, h, rng), glorot(1, h, rng), glorot(h, c, rng), glorot(1, c, rng)};
    Adam aw1(d, h), ab1(1, h), aw2(h, c), ab2(1, c);

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    int t = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[static_cast<std::size_t>(rng() % i)]);
        for (Eigen::Index start = 0; start < n; start += cfg.batch) {
            const Eigen::Index len = std::min<Eigen::Index>(cfg.batch, n - start);
            const std::vector<Eigen::Index> idx(order.begin() + start, order.begin() + start + len);
            const Matrix xb = x(idx, Eigen::all);
            const Matrix yb = y(idx, Eigen::all);

            const Matrix hb = net.hidden(xb);
            Matrix p = (hb * net.w2).rowwise() + net.b2.row(0);
            for (Eigen::Index r = 0; r < p.rows(); ++r) {
                const double mx = p.row(r).maxCoeff();
                p.row(r) = (p.row(r).array() - mx).exp();
                p.row(r) /= p.row(r).sum();
            }
            const double inv = 1.0 / static_cast<double>(len);
            const Matrix dz = (p - yb) * inv;
            const Matrix gw2 = hb.transpose() * dz + cfg.alpha * inv * net.w2;
            const Matrix gb2 = dz.colwise().sum();
            const Matrix dh = (dz * net.w2.transpose()).cwiseProduct((hb.array() > 0.0).cast<double>().matrix());
            const Matrix gw1 = xb.transpose() * dh + cfg.alpha * inv * net.w1;
            const Matrix gb1 = dh.colwise().sum();

            ++t;
            aw1.step(net.w1, gw1, cfg.lr, t);
            ab1.step(net.b1, gb1, cfg.lr, t);
            aw2.step(net.w2, gw2, cfg.lr, t);
            ab2.step(net.b2, gb2, cfg.lr, t);
        }
    }
    return net;
}

}  // namespace

std::string probe_kind_name(ProbeKind k) {
    switch (k) {
        case ProbeKind::Linear: return "linear";
        case ProbeKind::Mlp: return "mlp";
        case ProbeKind::Gw: return "gw";
    }
    return "unknown";
}

Split holdout_split(Eigen::Index n, std::uint64_t seed) {
    const auto n_train = static_cast<Eigen::Index>(
        std::floor(static_cast<double>(n) * (1.0 - kHoldoutFraction)));
    if (n_train < 1 || n_train >= n)
        throw InputError("probe: " + std::to_string(n) + " samples are too few for a held-out split");
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::mt19937_64 rng(seed);
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[static_cast<std::size_t>(rng() % i)]);
    Split s;
    s.train.assign(idx.begin(), idx.begin() + n_train);
    s.test.assign(idx.begin() + n_train, idx.end());
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

ProbeReport linear_probe(const ActivationBundle& bundle, const Targets& target,
                         const LinearProbeConfig& cfg) {
    validate(bundle);
    const Encoded enc = encode(target, bundle.samples());
    const Split split = holdout_split(bundle.samples(), cfg.seed);
    ProbeReport report = make_report(bundle, ProbeKind::Linear, target.kind);

    const Matrix y_train = enc.y(split.train, Eigen::all);
    const Matrix y_test = enc.y(split.test, Eigen::all);
    const Eigen::RowVectorXd y_mean = y_train.colwise().mean();

    parallel_for(bundle.layers.size(), cfg.threads, [&](std::size_t l) {
        const Matrix& x = bundle.layers[l].data;
        const Matrix x_train = x(split.train, Eigen::all);
        const Eigen::RowVectorXd x_mean = x_train.colwise().mean();
        const Matrix xc = x_train.rowwise() - x_mean;

        Matrix gram = xc.transpose() * xc;
        gram.diagonal().array() += kLinearRidge;
        const Matrix w = gram.ldlt().solve(xc.transpose() * (y_train.rowwise() - y_mean));
        const Matrix pred = ((x(split.test, Eigen::all).rowwise() - x_mean) * w).rowwise() + y_mean;
        if (!pred.allFinite()) throw NumericalError("linear probe: non-finite predictions");

        auto& rec = report.records[l];
        rec.fit_error = (pred - y_test).squaredNorm() / static_cast<double>(y_test.size());
        if (target.kind == TargetKind::Class) rec.accuracy = accuracy_of(pred, enc.labels, split.test);
    });
    rank(report);
    return report;
}

ProbeReport mlp_probe(const ActivationBundle& bundle, const Targets& target, const MlpProbeConfig& cfg) {
    validate(bundle);
    if (target.kind != TargetKind::Class) throw InputError("mlp probe requires class targets");
    if (cfg.hidden < 1 || cfg.epochs < 1 || cfg.batch < 1 || !(cfg.lr > 0.0))
        throw InputError("mlp probe: hidden, epochs, batch and lr must be positive");
    const Encoded enc = encode(target, bundle.samples());
    const Split split = holdout_split(bundle.samples(), cfg.seed);
    ProbeReport report = make_report(bundle, ProbeKind::Mlp, target.kind);
    const Matrix y_train = enc.y(split.train, Eigen::all);

    parallel_for(bundle.layers.size(), cfg.threads, [&](std::size_t l) {
        const auto& layer = bundle.layers[l];
        Matrix x_train = layer.data(split.train, Eigen::all);
        Matrix x_test = layer.data(split.test, Eigen::all);
        const Eigen::RowVectorXd mean = x_train.colwise().mean();
        Eigen::RowVectorXd sd = ((x_train.rowwise() - mean).colwise().squaredNorm() /
                                 static_cast<double>(x_train.rows())).cwiseSqrt();
        for (Eigen::Index c = 0; c < sd.size(); ++c)
            if (sd(c) == 0.0) sd(c) = 1.0;
        x_train = (x_train.rowwise() - mean).array().rowwise() / sd.array();
        x_test = (x_test.rowwise() - mean).array().rowwise() / sd.array();

        const Mlp net = train_mlp(x_train, y_train, cfg, derive_seed(cfg.seed, 0x6d6c70u, static_cast<std::uint64_t>(layer.layer_id)));
        const Matrix prob = net.probabilities(x_test);
        if (!prob.allFinite()) throw NumericalError("mlp probe: training diverged on layer '" + layer.name + "'");

        double ce = 0.0;
        for (std::size_t r = 0; r < split.test.size(); ++r) {
            const int label = enc.labels[static_cast<std::size_t>(split.test[r])];
            ce -= std::log(std::max(prob(static_cast<Eigen::Index>(r), label), 1e-300));
        }
        auto& rec = report.records[l];
        rec.fit_error = ce / static_cast<double>(split.test.size());
        rec.accuracy = accuracy_of(prob, enc.labels, split.test);
    });
    rank(report);
    return report;
}

ProbeReport gw_target_search(const ActivationBundle& bundle, const Targets& target,
                             const GwConfig& cfg, int threads) {
    validate(bundle);
    if (target.values.rows() != bundle.samples())
        throw InputError("targets have " + std::to_string(target.values.rows()) +
                         " rows but the bundle has " + std::to_string(bundle.samples()) + " samples");
    ProbeReport report = make_report(bundle, ProbeKind::Gw, target.kind);
    const Matrix& t = target.values;

    parallel_for(bundle.layers.size(), threads, [&](std::size_t l) {
        GwConfig layer_cfg = cfg;
        layer_cfg.seed = derive_seed(cfg.seed, 0x7461726765u, l);
        const auto& layer = bundle.layers[l];
        try {
            report.records[l].fit_error = gw_layer_distance(layer.data, t, layer_cfg);
        } catch (const InputError& e) {
            throw InputError("layer '" + layer.name + "' vs target: " + e.what());
        }
    });
    rank(report);
    return report;
}

}  // namespace netscope
