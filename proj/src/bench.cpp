#include "topomap/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "topomap/flat_atc.hpp"
#include "topomap/hierarchy.hpp"
#include "topomap/quantile.hpp"

namespace topomap::bench {

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

const char* to_string(Model model) {
    return model == Model::Linear ? "linear" : "logarithmic";
}

FitResult fit(std::span<const double> xs, std::span<const double> ys, Model model) {
    if (xs.size() != ys.size()) {
        throw std::invalid_argument("fit: xs and ys differ in length");
    }
    if (xs.size() < 3) {
        throw std::invalid_argument("fit: at least 3 points required");
    }
    const std::size_t n = xs.size();
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (model == Model::Logarithmic) {
            if (!(xs[i] > 0.0)) {
                throw std::invalid_argument("fit: logarithmic model needs x > 0");
            }
            u[i] = std::log(xs[i]);
        } else {
            u[i] = xs[i];
        }
    }
    double mean_u = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_u += u[i];
        mean_y += ys[i];
    }
    mean_u /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);
    double suu = 0.0, suy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        suu += (u[i] - mean_u) * (u[i] - mean_u);
        suy += (u[i] - mean_u) * (ys[i] - mean_y);
        syy += (ys[i] - mean_y) * (ys[i] - mean_y);
    }
    FitResult r;
    r.model = model;
    r.slope = suu > 0.0 ? suy / suu : 0.0;
    r.intercept = mean_y - r.slope * mean_u;
    if (syy == 0.0) {
        r.r_squared = 1.0;
        r.degenerate = true;
        return r;
    }
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = ys[i] - (r.slope * u[i] + r.intercept);
        ss_res += e * e;
    }
    r.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
    return r;
}

double percentile(std::span<const double> values, double q) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    return interpolated_quantile(sorted.size(), q, [&](std::size_t k) { return sorted[k]; });
}

double median(std::span<const double> values) {
    return percentile(values, 0.5);
}

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

namespace {

struct Decision {
    StepKind kind;
    NodeId node;
    std::optional<NodeId> s2;

    bool operator==(const Decision& o) const {
        if (kind != o.kind || node != o.node) {
            return false;
        }
        return kind != StepKind::UpdatedWithEdge || s2 == o.s2;
    }
};

Decision decision_of(const StepOutcome& outcome, const WinnerPair& winners) {
    return {outcome.kind, outcome.node, winners.s2};
}

class FrameSource {
public:
    explicit FrameSource(const SourceSpec& spec) : spec_(spec) {
        if (spec.kind == SourceSpec::Kind::Directory) {
            files_ = streams::list_frame_files(spec.directory);
        } else {
            spec.synthetic.validate();
        }
    }

    std::uint64_t available(std::uint64_t requested) const {
        if (spec_.kind == SourceSpec::Kind::Directory) {
            return std::min<std::uint64_t>(requested, files_.size());
        }
        return requested;
    }

    streams::Frame frame(std::uint64_t index) const {
        if (spec_.kind == SourceSpec::Kind::Synthetic) {
            return streams::synthetic_frame(spec_.synthetic, index);
        }
        auto f = streams::load_frame_file(files_[index]);
        f.frame_index = index;
        if (f.points.empty()) {
            throw std::runtime_error("frame file holds no points: " + files_[index].string());
        }
        return f;
    }

private:
    SourceSpec spec_;
    std::vector<std::filesystem::path> files_;
};

FrameMetrics run_null(std::span<const InputPoint> samples) {
    FrameMetrics m;
    const auto start = std::chrono::steady_clock::now();
    double sink = 0.0;
    for (const auto& p : samples) {
        sink += p.position.x();
    }
    const auto stop = std::chrono::steady_clock::now();
    volatile double keep = sink;
    (void)keep;
    m.wall_time_ms = std::chrono::duration<double, std::milli>(stop - start).count();
    return m;
}

}  // namespace

RunResult run(const RunConfig& config, const FrameObserver& observer) {
    config.learner.validate();
    FrameSource source(config.source);
    RunResult result{{}, MultiLayerMap(config.learner)};

    std::optional<MultiLayerMap> shadow;
    if (config.oracle_check) {
        if (config.mode == Mode::Null) {
            throw std::invalid_argument("oracle check needs a learning mode");
        }
        shadow.emplace(config.learner);
    }

    std::mt19937_64 rng(config.learner.rng_seed);
    const auto lambda = static_cast<std::size_t>(config.learner.lambda);
    const std::uint64_t frames = source.available(config.frames);
    std::vector<Decision> primary_decisions;
    hier::HierarchicalLearner hier_learner(result.map);

    for (std::uint64_t f = 0; f < frames; ++f) {
        const auto frame = source.frame(f);
        const auto samples = streams::sample_training_points(frame.points, lambda, rng);

        FrameMetrics metrics;
        switch (config.mode) {
            case Mode::Null:
                metrics = run_null(samples);
                record_structure(result.map, metrics);
                break;
            case Mode::Flat:
            case Mode::Hierarchical: {
                if (!config.oracle_check) {
                    metrics = config.mode == Mode::Flat ? flat::train_samples(result.map, samples)
                                                        : hier::train_samples(result.map, samples);
                    break;
                }
                primary_decisions.clear();
                primary_decisions.reserve(samples.size());
                if (config.mode == Mode::Flat) {
                    const auto start = std::chrono::steady_clock::now();
                    for (const auto& p : samples) {
                        const auto r = flat::train_point(result.map, p);
                        metrics.distance_evals += r.outcome.distance_evals;
                        primary_decisions.push_back(decision_of(r.outcome, r.winners));
                    }
                    const auto stop = std::chrono::steady_clock::now();
                    metrics.wall_time_ms =
                        std::chrono::duration<double, std::milli>(stop - start).count();
                } else {
                    // Drift: an exhaustive first winner within vigilance that the
                    // layered search missed. Measured on the same map before the
                    // step, outside the timed span.
                    std::chrono::steady_clock::duration timed{};
                    for (const auto& p : samples) {
                        const auto exact = flat::exhaustive_winners(p.position, result.map.layer(1));
                        const auto start = std::chrono::steady_clock::now();
                        const auto r = hier_learner.train_point(p);
                        timed += std::chrono::steady_clock::now() - start;
                        metrics.distance_evals += r.distance_evals;
                        primary_decisions.push_back(
                            decision_of(r.per_layer.front(), r.layer1_winners));
                        ++result.drift_steps;
                        if (exact.d1 <= config.learner.base_vigilance &&
                            exact.s1 != r.layer1_winners.s1) {
                            ++result.drift_mismatches;
                        }
                    }
                    metrics.wall_time_ms = std::chrono::duration<double, std::milli>(timed).count();
                }
                record_structure(result.map, metrics);

                std::uint64_t mismatches = 0;
                hier::HierarchicalLearner shadow_learner(*shadow);
                for (std::size_t i = 0; i < samples.size(); ++i) {
                    Decision d;
                    if (config.mode == Mode::Flat) {
                        const auto r = shadow_learner.train_point(samples[i]);
                        d = decision_of(r.per_layer.front(), r.layer1_winners);
                    } else {
                        const auto r = flat::train_point(*shadow, samples[i]);
                        d = decision_of(r.outcome, r.winners);
                    }
                    if (!(d == primary_decisions[i])) {
                        ++mismatches;
                    }
                }
                metrics.oracle_mismatches = mismatches;
                result.oracle_steps += samples.size();
                result.oracle_mismatches += mismatches;
                break;
            }
        }
        metrics.frame_index = f;
        if (observer) {
            observer(result.map, metrics);
        }
        result.frames.push_back(std::move(metrics));
        if (config.stop_at_layer1_nodes > 0 &&
            result.map.layer(1).node_count() >= config.stop_at_layer1_nodes) {
            break;
        }
    }
    return result;
}

OracleReport oracle_check(const streams::SyntheticStreamConfig& stream, std::uint64_t frames,
                          LearnerConfig learner) {
    RunConfig config;
    config.mode = Mode::Hierarchical;
    config.source.kind = SourceSpec::Kind::Synthetic;
    config.source.synthetic = stream;
    config.frames = frames;
    config.learner = learner;
    config.oracle_check = true;
    const auto r = run(config);
    OracleReport report;
    report.steps = r.oracle_steps;
    report.mismatches = r.oracle_mismatches;
    report.rate = r.oracle_steps == 0 ? 0.0
                                      : static_cast<double>(r.oracle_mismatches) /
                                            static_cast<double>(r.oracle_steps);
    report.drift_mismatches = r.drift_mismatches;
    report.drift_rate = r.drift_steps == 0 ? 0.0
                                           : static_cast<double>(r.drift_mismatches) /
                                                 static_cast<double>(r.drift_steps);
    return report;
}

std::vector<double> SweepRange::values() const {
    if (!(lo > 1.0) || !(hi >= lo) || !(step > 0.0)) {
        throw std::invalid_argument("alpha sweep needs 1 < lo <= hi and step > 0");
    }
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(lo + static_cast<double>(i) * step);
    }
    return out;
}

SweepRange parse_sweep_range(const std::string& text) {
    std::istringstream in(text);
    SweepRange r;
    char c1 = 0, c2 = 0;
    if (!(in >> r.lo >> c1 >> r.hi >> c2 >> r.step) || c1 != ':' || c2 != ':' ||
        in.peek() != std::char_traits<char>::eof()) {
        throw std::invalid_argument("alpha sweep must look like lo:hi:step, got '" + text + "'");
    }
    r.values();  // validates
    return r;
}

std::vector<SweepRow> alpha_sweep(const SweepRange& range, const SourceSpec& source,
                                  std::uint64_t frames, LearnerConfig learner) {
    std::vector<SweepRow> rows;
    for (double alpha : range.values()) {
        RunConfig config;
        config.mode = Mode::Hierarchical;
        config.source = source;
        config.frames = frames;
        config.learner = learner;
        config.learner.alpha = alpha;
        const auto r = run(config);

        std::vector<double> times, evals;
        for (const auto& m : r.frames) {
            times.push_back(m.wall_time_ms);
            evals.push_back(static_cast<double>(m.distance_evals));
        }
        SweepRow row;
        row.alpha = alpha;
        if (!r.frames.empty()) {
            row.median_wall_ms = median(times);
            row.median_distance_evals = median(evals);
        }
        row.total_nodes = r.map.total_nodes();
        row.layer_count = r.map.layer_count();
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

CsvTable read_csv(std::istream& in) {
    CsvTable table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> fields;
        std::string field;
        std::istringstream ls(line);
        while (std::getline(ls, field, ',')) {
            fields.push_back(field);
        }
        if (line.back() == ',') {
            fields.emplace_back();
        }
        if (first) {
            table.header = std::move(fields);
            first = false;
        } else {
            if (fields.size() != table.header.size()) {
                throw std::runtime_error("csv row has " + std::to_string(fields.size()) +
                                         " fields, header has " +
                                         std::to_string(table.header.size()));
            }
            table.rows.push_back(std::move(fields));
        }
    }
    return table;
}

void write_metrics_csv(std::ostream& out, std::span<const FrameMetrics> rows) {
    std::size_t k = 0;
    for (const auto& r : rows) {
        k = std::max(k, r.nodes_per_layer.size());
    }
    out << "frame,wall_ms,dist_evals,L";
    for (std::size_t l = 1; l <= k; ++l) {
        out << ",nodes_l" << l;
    }
    for (std::size_t l = 1; l <= k; ++l) {
        out << ",edges_l" << l;
    }
    out << ",mismatches\n";
    out << std::fixed << std::setprecision(4);
    for (const auto& r : rows) {
        out << r.frame_index << ',' << r.wall_time_ms << ',' << r.distance_evals << ','
            << r.layer_count;
        for (std::size_t l = 0; l < k; ++l) {
            out << ',' << (l < r.nodes_per_layer.size() ? r.nodes_per_layer[l] : 0);
        }
        for (std::size_t l = 0; l < k; ++l) {
            out << ',' << (l < r.edges_per_layer.size() ? r.edges_per_layer[l] : 0);
        }
        out << ',';
        if (r.oracle_mismatches) {
            out << *r.oracle_mismatches;
        }
        out << '\n';
    }
}

std::vector<FrameMetrics> read_metrics_csv(std::istream& in) {
    const auto table = read_csv(in);
    const auto& h = table.header;
    if (h.size() < 5 || h[0] != "frame" || h[1] != "wall_ms" || h[2] != "dist_evals" ||
        h[3] != "L" || h.back() != "mismatches" || (h.size() - 5) % 2 != 0) {
        throw std::runtime_error("not a metrics csv header");
    }
    const std::size_t k = (h.size() - 5) / 2;
    for (std::size_t l = 1; l <= k; ++l) {
        if (h[3 + l] != "nodes_l" + std::to_string(l) ||
            h[3 + k + l] != "edges_l" + std::to_string(l)) {
            throw std::runtime_error("unexpected per-layer column names");
        }
    }
    std::vector<FrameMetrics> out;
    for (const auto& row : table.rows) {
        if (row.size() != h.size()) {
            throw std::runtime_error("metrics row has " + std::to_string(row.size()) +
                                     " fields, header has " + std::to_string(h.size()));
        }
        FrameMetrics m;
        m.frame_index = std::stoull(row[0]);
        m.wall_time_ms = std::stod(row[1]);
        m.distance_evals = std::stoull(row[2]);
        m.layer_count = std::stoull(row[3]);
        for (std::size_t l = 0; l < m.layer_count && l < k; ++l) {
            m.nodes_per_layer.push_back(std::stoull(row[4 + l]));
            m.edges_per_layer.push_back(std::stoull(row[4 + k + l]));
        }
        if (!row.back().empty()) {
            m.oracle_mismatches = std::stoull(row.back());
        }
        out.push_back(std::move(m));
    }
    return out;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
    out << "alpha,median_wall_ms,median_dist_evals,total_nodes,L\n";
    for (const auto& r : rows) {
        out << std::defaultfloat << std::setprecision(6) << r.alpha << ',' << std::fixed
            << std::setprecision(4) << r.median_wall_ms << ',' << std::setprecision(1)
            << r.median_distance_evals << ',' << r.total_nodes << ',' << r.layer_count << '\n';
    }
}

void write_analysis(std::ostream& out) {
    static constexpr double kRatios[] = {0.0, 0.5, 1.5, 5.0, 10.0};
    const complexity::Grid grid{1.0 + 1e-3, 10.0, 1e-3};
    out << "r,alpha_star\n";
    out << std::fixed << std::setprecision(3);
    for (double r : kRatios) {
        out << std::setprecision(1) << r << ',' << std::setprecision(3)
            << complexity::alpha_star(r, grid) << '\n';
    }
    out << '\n';

    const double kappa = complexity::max_packing_constant();
    out << "alpha";
    for (double r : kRatios) {
        out << ",H_r" << std::setprecision(1) << r;
    }
    out << ",layers_N1e4,layers_N1e6,k_limit,space_ratio\n";
    out << std::setprecision(6);
    for (int i = 0; i <= 90; ++i) {
        const double alpha = 1.1 + 0.1 * i;
        out << alpha;
        for (double r : kRatios) {
            out << ',' << complexity::objective_H(alpha, r);
        }
        out << ',' << complexity::layer_count(10000, alpha) << ','
            << complexity::layer_count(1000000, alpha) << ','
            << complexity::candidate_size_limit(alpha, kappa) << ','
            << complexity::space_bound(1, alpha) << '\n';
    }
    out.unsetf(std::ios::floatfield);
}

}  // namespace topomap::bench
