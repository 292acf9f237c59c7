#include "mtswarm/temperature.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <stdexcept>

#include "mtswarm/csv.hpp"
#include "mtswarm/errors.hpp"
#include "mtswarm/rng.hpp"

namespace mtswarm {

double normalize_temperature(double kelvin) { return (kelvin - 200.0) / 200.0; }

MlpModel MlpModel::zeros(std::size_t n_inputs, std::size_t hidden) {
    MlpModel m;
    m.W1 = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(hidden), static_cast<Eigen::Index>(n_inputs));
    m.b1 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(hidden));
    m.w2 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(hidden));
    return m;
}

Eigen::VectorXd MlpModel::parameters() const {
    Eigen::VectorXd p(static_cast<Eigen::Index>(parameter_count()));
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < W1.rows(); ++i)
        for (Eigen::Index j = 0; j < W1.cols(); ++j) p[k++] = W1(i, j);
    p.segment(k, b1.size()) = b1;
    k += b1.size();
    p.segment(k, w2.size()) = w2;
    k += w2.size();
    p[k] = b2;
    return p;
}

void MlpModel::set_parameters(const Eigen::VectorXd& p) {
    if (static_cast<std::size_t>(p.size()) != parameter_count())
        throw std::invalid_argument("set_parameters: expected " + std::to_string(parameter_count()) + " values, got " +
                                    std::to_string(p.size()));
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < W1.rows(); ++i)
        for (Eigen::Index j = 0; j < W1.cols(); ++j) W1(i, j) = p[k++];
    b1 = p.segment(k, b1.size());
    k += b1.size();
    w2 = p.segment(k, w2.size());
    k += w2.size();
    b2 = p[k];
}

namespace {

Eigen::MatrixXd standardized(const MlpModel& m, const Eigen::MatrixXd& X) {
    if (static_cast<std::size_t>(X.cols()) != m.n_inputs())
        throw std::invalid_argument("model expects " + std::to_string(m.n_inputs()) + " inputs, got " +
                                    std::to_string(X.cols()));
    if (m.input_mean.size() == 0) return X;
    return (X.rowwise() - m.input_mean.transpose()).array().rowwise() / m.input_scale.transpose().array();
}

}  // namespace

Eigen::VectorXd predict_rows(const MlpModel& m, const Eigen::MatrixXd& X) {
    const Eigen::MatrixXd S = standardized(m, X);
    const Eigen::MatrixXd H = ((S * m.W1.transpose()).rowwise() + m.b1.transpose()).cwiseMax(0.0);
    return (H * m.w2).array() + m.b2;
}

double predict(const MlpModel& m, const Eigen::VectorXd& x) { return predict_rows(m, x.transpose())[0]; }

double mse_and_gradient(const MlpModel& m, const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Eigen::VectorXd* grad) {
    if (X.rows() != y.size() || X.rows() == 0) throw std::invalid_argument("mse_and_gradient: bad shapes");
    const double n = static_cast<double>(X.rows());
    const Eigen::MatrixXd S = standardized(m, X);
    const Eigen::MatrixXd A = (S * m.W1.transpose()).rowwise() + m.b1.transpose();
    const Eigen::MatrixXd H = A.cwiseMax(0.0);
    const Eigen::VectorXd r = (H * m.w2).array() + m.b2 - y.array();
    const double loss = r.squaredNorm() / n;
    if (grad) {
        const Eigen::VectorXd dy = (2.0 / n) * r;
        const Eigen::MatrixXd dA = ((dy * m.w2.transpose()).array() * (A.array() > 0.0).cast<double>()).matrix();
        const Eigen::MatrixXd gW1 = dA.transpose() * S;
        MlpModel g = MlpModel::zeros(m.n_inputs(), m.hidden());
        g.W1 = gW1;
        g.b1 = dA.colwise().sum().transpose();
        g.w2 = H.transpose() * dy;
        g.b2 = dy.sum();
        *grad = g.parameters();
    }
    return loss;
}

void TrainConfig::validate() const {
    if (hidden == 0) throw ConfigError("hidden", "must be >= 1");
    if (epochs == 0) throw ConfigError("epochs", "must be >= 1");
    if (batch_size == 0) throw ConfigError("batch_size", "must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate", "must be > 0");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum", "must be in [0, 1)");
    if (!(val_fraction >= 0.0 && val_fraction < 1.0)) throw ConfigError("val_fraction", "must be in [0, 1)");
}

void split_rows(std::size_t n, const TrainConfig& cfg, std::vector<std::size_t>& train, std::vector<std::size_t>& val) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    CounterRng rng = CounterRng(cfg.split_seed).substream(4);
    for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
    auto n_val = static_cast<std::size_t>(std::floor(cfg.val_fraction * static_cast<double>(n)));
    if (n_val >= n) n_val = n - 1;
    val.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_val));
    train.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_val), idx.end());
    std::sort(val.begin(), val.end());
    std::sort(train.begin(), train.end());
}

namespace {

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& X, const std::vector<std::size_t>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), X.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(rows[i]));
    return out;
}

Eigen::VectorXd take(const Eigen::VectorXd& y, const std::vector<std::size_t>& rows) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Eigen::Index>(i)] = y[static_cast<Eigen::Index>(rows[i])];
    return out;
}

}  // namespace

TrainResult fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const TrainConfig& cfg) {
    cfg.validate();
    if (X.rows() != y.size()) throw std::invalid_argument("fit: X and y row counts differ");
    if (X.rows() < 2) throw std::invalid_argument("fit: need at least two samples");
    if (!X.allFinite() || !y.allFinite()) throw NumericError(0, "fit: non-finite training data");

    TrainResult res;
    split_rows(static_cast<std::size_t>(X.rows()), cfg, res.train_rows, res.val_rows);
    const Eigen::MatrixXd Xt = take_rows(X, res.train_rows);
    const Eigen::VectorXd yt = take(y, res.train_rows);
    const Eigen::MatrixXd Xv = take_rows(X, res.val_rows);
    const Eigen::VectorXd yv = take(y, res.val_rows);

    const auto d = static_cast<std::size_t>(X.cols());
    MlpModel& m = res.model;
    m = MlpModel::zeros(d, cfg.hidden);
    m.input_mean = Xt.colwise().mean().transpose();
    m.input_scale = ((Xt.rowwise() - m.input_mean.transpose()).array().square().colwise().mean().sqrt()).transpose();
    for (Eigen::Index j = 0; j < m.input_scale.size(); ++j)
        if (!(m.input_scale[j] > 1e-12)) m.input_scale[j] = 1.0;

    // He initialisation for the ReLU layer; the output layer starts small
    // because targets live in [0, 1], with its bias at the target mean.
    CounterRng init = CounterRng(cfg.seed).substream(5);
    const double s1 = std::sqrt(2.0 / static_cast<double>(d));
    const double s2 = 0.1 / std::sqrt(static_cast<double>(cfg.hidden));
    for (Eigen::Index i = 0; i < m.W1.rows(); ++i)
        for (Eigen::Index j = 0; j < m.W1.cols(); ++j) m.W1(i, j) = s1 * init.normal();
    for (Eigen::Index i = 0; i < m.w2.size(); ++i) m.w2[i] = s2 * init.normal();
    const double y_mean = yt.mean();
    m.b2 = y_mean;

    res.baseline_val_mse = yv.size() > 0 ? (yv.array() - y_mean).square().mean() : 0.0;

    Eigen::VectorXd theta = m.parameters();
    Eigen::VectorXd velocity = Eigen::VectorXd::Zero(theta.size());
    Eigen::VectorXd g;
    std::vector<std::size_t> order(res.train_rows.size());
    std::iota(order.begin(), order.end(), 0);
    CounterRng shuffle = CounterRng(cfg.seed).substream(6);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);
        for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
            const std::size_t e = std::min(order.size(), b + cfg.batch_size);
            const std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(b),
                                                 order.begin() + static_cast<std::ptrdiff_t>(e));
            m.set_parameters(theta);
            mse_and_gradient(m, take_rows(Xt, batch), take(yt, batch), &g);
            velocity = cfg.momentum * velocity - cfg.learning_rate * g;
            theta += velocity;
        }
        if (!theta.allFinite()) throw NumericError(epoch, "fit: training diverged at epoch " + std::to_string(epoch));
        m.set_parameters(theta);
        res.train_mse.push_back(mse_and_gradient(m, Xt, yt, nullptr));
        res.val_mse.push_back(yv.size() > 0 ? mse_and_gradient(m, Xv, yv, nullptr) : 0.0);
    }
    return res;
}

TrainResult train(const Eigen::MatrixXd& X, std::span<const double> kelvin, const TrainConfig& cfg) {
    if (static_cast<std::size_t>(X.rows()) != kelvin.size())
        throw std::invalid_argument("train: " + std::to_string(X.rows()) + " rows but " +
                                    std::to_string(kelvin.size()) + " temperatures");
    const std::set<double> distinct(kelvin.begin(), kelvin.end());
    if (distinct.size() < 2)
        throw std::invalid_argument("train: data holds a single temperature; a regressor needs at least two");
    Eigen::VectorXd y(static_cast<Eigen::Index>(kelvin.size()));
    for (std::size_t i = 0; i < kelvin.size(); ++i) y[static_cast<Eigen::Index>(i)] = normalize_temperature(kelvin[i]);
    return fit(X, y, cfg);
}

double evaluate(const MlpModel& m, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    return mse_and_gradient(m, X, y, nullptr);
}

RepeatSummary train_repeats(const Eigen::MatrixXd& X, std::span<const double> kelvin, const TrainConfig& cfg,
                            std::size_t repeats, MlpModel* first_model) {
    if (repeats == 0) throw std::invalid_argument("train_repeats: repeats must be >= 1");
    RepeatSummary s;
    for (std::size_t r = 0; r < repeats; ++r) {
        TrainConfig c = cfg;
        c.seed = cfg.seed + r;
        auto res = train(X, kelvin, c);
        if (r == 0 && first_model) *first_model = res.model;
        s.val_mse.push_back(res.val_mse.back());
        s.baseline_mse.push_back(res.baseline_val_mse);
    }
    const double n = static_cast<double>(repeats);
    s.mean = std::accumulate(s.val_mse.begin(), s.val_mse.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : s.val_mse) ss += (v - s.mean) * (v - s.mean);
    s.stddev = repeats > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    s.baseline_mean = std::accumulate(s.baseline_mse.begin(), s.baseline_mse.end(), 0.0) / n;
    return s;
}

std::vector<TrackPoint> track(const MlpModel& m, const Eigen::MatrixXd& X, std::span<const std::uint32_t> frames,
                              std::span<const double> kelvin) {
    if (frames.size() != static_cast<std::size_t>(X.rows()) || kelvin.size() != frames.size())
        throw std::invalid_argument("track: frames, temperatures and rows must have equal length");
    const Eigen::VectorXd p = predict_rows(m, X);
    std::vector<TrackPoint> out(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i)
        out[i] = {frames[i], normalize_temperature(kelvin[i]), p[static_cast<Eigen::Index>(i)]};
    return out;
}

std::optional<std::size_t> sustained_crossing(std::span<const double> predicted, double level, std::size_t window) {
    if (window == 0) throw std::invalid_argument("sustained_crossing: window must be >= 1");
    const std::size_t n = predicted.size();
    if (n == 0) return std::nullopt;
    // Walk back from the end while the trailing mean stays at or above level.
    std::optional<std::size_t> first;
    for (std::size_t f = n; f-- > 0;) {
        const std::size_t lo = f + 1 >= window ? f + 1 - window : 0;
        double sum = 0.0;
        for (std::size_t i = lo; i <= f; ++i) sum += predicted[i];
        if (sum / static_cast<double>(f + 1 - lo) < level) break;
        first = f;
    }
    return first;
}

void write_model(const std::filesystem::path& path, const MlpModel& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << "# shape n_in=" << m.n_inputs() << " hidden=" << m.hidden() << '\n';
    auto vec_line = [&](const char* name, const Eigen::VectorXd& v) {
        out << "# " << name << '=';
        for (Eigen::Index i = 0; i < v.size(); ++i) out << (i ? ";" : "") << fmt_g17(v[i]);
        out << '\n';
    };
    if (m.input_mean.size() > 0) {
        vec_line("input_mean", m.input_mean);
        vec_line("input_scale", m.input_scale);
    }
    out << "index,value\n";
    const Eigen::VectorXd p = m.parameters();
    for (Eigen::Index i = 0; i < p.size(); ++i) out << i << ',' << fmt_g17(p[i]) << '\n';
}

namespace {

Eigen::VectorXd parse_vec(const std::string& s, const CsvReader& in) {
    std::vector<double> v;
    std::size_t start = 0;
    while (start <= s.size()) {
        const std::size_t end = std::min(s.find(';', start), s.size());
        v.push_back(in.to_double(s.substr(start, end - start), 0));
        start = end + 1;
    }
    return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

MlpModel read_model(const std::filesystem::path& path) {
    CsvReader in(path);
    in.expect_header({"index", "value"});
    std::size_t n_in = 0, hidden = 0;
    bool have_shape = false;
    Eigen::VectorXd mean, scale;
    for (const auto& raw : in.comments()) {
        const std::string c = raw.substr(std::min(raw.find_first_not_of(' '), raw.size()));
        if (c.rfind("shape ", 0) == 0) {
            if (std::sscanf(c.c_str(), "shape n_in=%zu hidden=%zu", &n_in, &hidden) != 2)
                throw FormatError(path.string() + ": malformed shape line '" + c + "'");
            have_shape = true;
        } else if (c.rfind("input_mean=", 0) == 0) {
            mean = parse_vec(c.substr(11), in);
        } else if (c.rfind("input_scale=", 0) == 0) {
            scale = parse_vec(c.substr(12), in);
        }
    }
    if (!have_shape || n_in == 0 || hidden == 0) throw FormatError(path.string() + ": missing '# shape' line");
    MlpModel m = MlpModel::zeros(n_in, hidden);
    if (mean.size() != scale.size() || (mean.size() != 0 && static_cast<std::size_t>(mean.size()) != n_in))
        throw FormatError(path.string() + ": input standardisation does not match n_in=" + std::to_string(n_in));
    m.input_mean = mean;
    m.input_scale = scale;
    std::vector<double> p;
    while (auto row = in.next()) {
        const auto idx = in.to_uint((*row)[0], 0);
        if (idx != p.size()) throw FormatError(path.string() + ": parameter index " + std::to_string(idx) + " out of order");
        p.push_back(in.to_double((*row)[1], 1));
    }
    if (p.size() != m.parameter_count())
        throw FormatError(path.string() + ": expected " + std::to_string(m.parameter_count()) + " parameters, found " +
                          std::to_string(p.size()));
    m.set_parameters(Eigen::Map<Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size())));
    return m;
}

void write_tracking_csv(const std::filesystem::path& path, std::span<const TrackPoint> pts) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << "frame,true_norm_temp,predicted_norm_temp\n";
    for (const auto& p : pts) out << p.frame << ',' << fmt_g17(p.true_norm) << ',' << fmt_g17(p.predicted) << '\n';
}

}  // namespace mtswarm
