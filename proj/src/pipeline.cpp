#include "mtswarm/pipeline.hpp"

#include <stdexcept>

#include "mtswarm/errors.hpp"

namespace mtswarm {

std::string run_name_of(const std::filesystem::path& trajectory) { return trajectory.stem().string(); }

FeatureMatrix featurize_files(std::span<const std::filesystem::path> trajectories, const FeaturizeOptions& opts) {
    FeatureMatrix all;
    all.dim = kDescriptorDim;
    for (const auto& p : trajectories) all.append(featurize(read_trajectory(p), run_name_of(p), opts));
    return all;
}

std::vector<TileMeta> manifest_of_files(std::span<const std::filesystem::path> trajectories) {
    std::vector<TileMeta> out;
    for (const auto& p : trajectories) {
        const Trajectory t = read_trajectory(p);
        const std::string run = run_name_of(p);
        for (std::uint32_t f = 0; f < t.n_frames(); ++f)
            for (std::uint32_t k = 0; k < kTilesPerFrame; ++k) out.push_back({run, t.temperatures[f], f, k});
    }
    return out;
}

LearnStage learn_stage(const FeatureMatrix& features, std::size_t n_atoms, const SparseCodingConfig& cfg,
                       std::uint64_t seed, bool standardize) {
    Eigen::MatrixXd Z = to_matrix(features);
    FeatureTransform transform;
    if (standardize) {
        transform = FeatureTransform::standardize(Z);
        Z = transform.apply(Z);
    }
    LearnResult lr = learn_dictionary(Z, n_atoms, cfg, seed);
    LearnStage out;
    out.dictionary = std::move(lr.dictionary);
    out.dictionary.transform = transform;
    std::vector<double> temps;
    temps.reserve(features.rows());
    for (const auto& m : features.meta) temps.push_back(m.temperature);
    out.dictionary.relevancy_order = rank_atoms(lr.activations, temps);
    out.activations.meta = features.meta;
    out.activations.C = std::move(lr.activations);
    out.activations.objective = std::move(lr.objective);
    out.history = std::move(lr.history);
    return out;
}

ActivationTable decompose(const Dictionary& dict, const FeatureMatrix& features, unsigned jobs) {
    if (features.dim != dict.dim())
        throw FormatError("feature dimension " + std::to_string(features.dim) + " does not match dictionary dimension " +
                          std::to_string(dict.dim()));
    SparseCodingConfig cfg;
    cfg.mu = dict.mu;
    cfg.jobs = jobs;
    CodingResult r = sparse_code_all(dict.transform.apply(to_matrix(features)), dict.atoms, cfg);
    ActivationTable t;
    t.meta = features.meta;
    t.C = std::move(r.C);
    t.objective = std::move(r.objective);
    return t;
}

TemperatureData temperature_data(const ActivationTable& acts, bool per_tile) {
    TemperatureData d;
    if (per_tile) {
        d.X = acts.C.transpose();
        d.meta = acts.meta;
    } else {
        FrameActivations fa = frame_averages(acts);
        d.X = std::move(fa.X);
        d.meta = std::move(fa.frames);
    }
    d.kelvin.reserve(d.meta.size());
    for (const auto& m : d.meta) d.kelvin.push_back(m.temperature);
    return d;
}

ActivationTable select_run(const ActivationTable& acts, const std::string& run) {
    std::vector<Eigen::Index> cols;
    ActivationTable out;
    for (std::size_t j = 0; j < acts.meta.size(); ++j) {
        if (acts.meta[j].run == run) {
            cols.push_back(static_cast<Eigen::Index>(j));
            out.meta.push_back(acts.meta[j]);
        }
    }
    if (cols.empty()) throw std::invalid_argument("no rows for run '" + run + "'");
    out.C.resize(acts.C.rows(), static_cast<Eigen::Index>(cols.size()));
    out.objective.resize(static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) {
        out.C.col(static_cast<Eigen::Index>(i)) = acts.C.col(cols[i]);
        out.objective[static_cast<Eigen::Index>(i)] = acts.objective.size() ? acts.objective[cols[i]] : 0.0;
    }
    return out;
}

}  // namespace mtswarm
