#include <evoscape/experiment.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

namespace evoscape {

using nlohmann::json;

namespace {

Vector to_vector(const json& j) {
    Vector v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        v[static_cast<Index>(i)] = j[i].get<Scalar>();
    return v;
}

Vector2 to_vector2(const json& j) {
    if (j.size() != 2)
        throw std::invalid_argument("config: expected a 2-vector");
    return Vector2(j[0].get<Scalar>(), j[1].get<Scalar>());
}

std::string digest_hex(std::uint64_t digest) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(digest));
    return buf;
}

} // namespace

std::string format_double(Scalar v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

BehaviorFn EnvironmentSpec::make(const NetworkShape& shape) const {
    if (kind == "point_push")
        return world.behavior_fn();
    if (kind == "linear") {
        Matrix a = linear_scale * coordinate_selector(behavior_dim, shape.parameter_count());
        return linear_landscape(std::move(a), Vector::Zero(behavior_dim));
    }
    if (kind == "sinusoid") {
        Matrix c = Matrix::Zero(behavior_dim, shape.parameter_count());
        const Index terms = std::min(sinusoid_terms, shape.parameter_count());
        for (Index j = 0; j < behavior_dim; ++j)
            for (Index i = 0; i < terms; ++i)
                c(j, i) = sinusoid_frequency * static_cast<Scalar>(j + 1);
        return sinusoid_landscape(std::move(c));
    }
    if (kind == "constant") {
        Vector value = constant_value.size() > 0 ? constant_value : Vector::Zero(behavior_dim);
        return constant_landscape(std::move(value));
    }
    throw std::invalid_argument("unknown environment kind: " + kind);
}

NetworkShape EnvironmentSpec::default_shape() const {
    if (kind == "point_push")
        return NetworkShape(PointPushWorld::kObservationDim, {32, 32}, PointPushWorld::kActionDim);
    // Analytic landscapes read the raw weight vector; a small net keeps
    // scans cheap while leaving the genotype interface unchanged.
    return NetworkShape(4, {8}, 2);
}

NicheGrid EnvironmentSpec::default_grid() const {
    if (kind == "point_push")
        return NicheGrid(Vector(world.arena_lo), Vector(world.arena_hi), {10, 10});
    return NicheGrid::uniform(behavior_dim, -2.0, 2.0, 10);
}

ExperimentConfig ExperimentConfig::with_profile(const std::string& profile) {
    ExperimentConfig cfg;
    if (profile == "desk") {
        cfg.runs_per_config = 10;
        cfg.walk_length = 25;
        cfg.mutation.offspring_count = 30;
    } else if (profile == "paper") {
        cfg.runs_per_config = 50;
        cfg.walk_length = 50;
        cfg.mutation.offspring_count = 30;
    } else {
        throw std::invalid_argument("unknown profile: " + profile);
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path, const std::string& profile) {
    ExperimentConfig cfg = with_profile(profile);

    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open config file: " + path.string());
    json j = json::parse(in);

    if (j.contains("global_seed")) cfg.global_seed = j["global_seed"].get<std::uint64_t>();
    if (j.contains("runs_per_config")) cfg.runs_per_config = j["runs_per_config"].get<int>();
    if (j.contains("parallelism")) cfg.parallelism = j["parallelism"].get<int>();
    if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();

    if (j.contains("environment")) {
        const json& e = j["environment"];
        if (e.contains("kind")) cfg.environment.kind = e["kind"].get<std::string>();
        if (e.contains("arena_lo")) cfg.environment.world.arena_lo = to_vector2(e["arena_lo"]);
        if (e.contains("arena_hi")) cfg.environment.world.arena_hi = to_vector2(e["arena_hi"]);
        if (e.contains("agent_start")) cfg.environment.world.agent_start = to_vector2(e["agent_start"]);
        if (e.contains("block_start")) cfg.environment.world.block_start = to_vector2(e["block_start"]);
        if (e.contains("agent_radius")) cfg.environment.world.agent_radius = e["agent_radius"].get<Scalar>();
        if (e.contains("block_radius")) cfg.environment.world.block_radius = e["block_radius"].get<Scalar>();
        if (e.contains("step_size")) cfg.environment.world.step_size = e["step_size"].get<Scalar>();
        if (e.contains("max_steps")) cfg.environment.world.max_steps = e["max_steps"].get<int>();
        if (e.contains("behavior_dim")) cfg.environment.behavior_dim = e["behavior_dim"].get<Index>();
        if (e.contains("linear_scale")) cfg.environment.linear_scale = e["linear_scale"].get<Scalar>();
        if (e.contains("sinusoid_frequency"))
            cfg.environment.sinusoid_frequency = e["sinusoid_frequency"].get<Scalar>();
        if (e.contains("sinusoid_terms")) cfg.environment.sinusoid_terms = e["sinusoid_terms"].get<Index>();
        if (e.contains("constant_value")) cfg.environment.constant_value = to_vector(e["constant_value"]);
    }

    if (j.contains("network")) {
        const json& n = j["network"];
        NetworkShape shape;
        shape.input_dim = n.value("input_dim", 0);
        shape.output_dim = n.value("output_dim", 0);
        if (n.contains("hidden_dims"))
            shape.hidden_dims = n["hidden_dims"].get<std::vector<int>>();
        cfg.network = shape; // validated in finalize once defaults are known
    }

    if (j.contains("grid")) {
        const json& g = j["grid"];
        cfg.grid = NicheGrid(to_vector(g.at("lo")), to_vector(g.at("hi")),
                             g.at("cells").get<std::vector<int>>());
    }

    if (j.contains("mutation")) {
        const json& m = j["mutation"];
        if (m.contains("scale")) cfg.mutation.scale = m["scale"].get<Scalar>();
        if (m.contains("per_weight_prob")) cfg.mutation.per_weight_prob = m["per_weight_prob"].get<Scalar>();
        if (m.contains("offspring_count")) cfg.mutation.offspring_count = m["offspring_count"].get<int>();
    }

    if (j.contains("archive")) {
        const json& a = j["archive"];
        if (a.contains("capacity")) cfg.archive_capacity = a["capacity"].get<Index>();
        if (a.contains("admission_prob")) cfg.archive_admission_prob = a["admission_prob"].get<Scalar>();
    }

    if (j.contains("walk") && j["walk"].contains("length"))
        cfg.walk_length = j["walk"]["length"].get<int>();
    if (j.contains("knn_k")) cfg.knn_k = j["knn_k"].get<int>();
    if (j.contains("kde")) {
        const json& k = j["kde"];
        if (k.contains("bandwidth")) cfg.kde.bandwidth = k["bandwidth"].get<Scalar>();
        if (k.contains("discount_lambda")) cfg.kde.discount_lambda = k["discount_lambda"].get<Scalar>();
    }

    if (j.contains("pressure_sweep")) {
        const json& p = j["pressure_sweep"];
        if (p.contains("top_fractions"))
            cfg.sweep_top_fractions = p["top_fractions"].get<std::vector<Scalar>>();
        if (p.contains("metric")) cfg.sweep_metric = p["metric"].get<std::string>();
    }

    if (j.contains("metric_comparison")) {
        const json& m = j["metric_comparison"];
        if (m.contains("metrics"))
            cfg.comparison_metrics = m["metrics"].get<std::vector<std::string>>();
        if (m.contains("walk_kind")) cfg.comparison_walk_kind = m["walk_kind"].get<std::string>();
    }

    if (j.contains("markov")) {
        const json& m = j["markov"];
        if (m.contains("budget")) cfg.markov_budget = m["budget"].get<Index>();
        if (m.contains("genotype_count")) cfg.markov_genotype_count = m["genotype_count"].get<int>();
        if (m.contains("l")) cfg.markov_params.l = m["l"].get<int>();
        if (m.contains("u")) cfg.markov_params.u = m["u"].get<int>();
        if (m.contains("repeats")) cfg.markov_params.repeats = m["repeats"].get<int>();
        if (m.contains("sample_size")) cfg.markov_params.sample_size = m["sample_size"].get<Index>();
        if (m.contains("per_niche")) cfg.markov_per_niche = m["per_niche"].get<bool>();
        if (m.contains("transition_file"))
            cfg.markov_transition_file = m["transition_file"].get<std::string>();
    }

    if (j.contains("dissimila") && j["dissimila"].contains("genotype_count"))
        cfg.dissimila_genotype_count = j["dissimila"]["genotype_count"].get<int>();

    return cfg;
}

void ExperimentConfig::finalize() {
    if (network.input_dim == 0)
        network = environment.default_shape();
    network.validate();
    if (grid.lo.size() == 0)
        grid = environment.default_grid();
    if (sweep_top_fractions.empty())
        sweep_top_fractions = {1.0 / mutation.offspring_count, 0.1, 0.25, 0.5, 0.75, 1.0};
    if (runs_per_config < 1)
        throw std::invalid_argument("config: runs_per_config must be >= 1");
    if (parallelism < 1)
        parallelism = 1;
    mutation.validate();
}

DiversityMetric ExperimentConfig::make_metric(const std::string& name) const {
    DiversityMetric metric;
    metric.kind = metric_kind_from_string(name);
    metric.k = knn_k;
    metric.kde = kde;
    return metric;
}

// ---------------------------------------------------------------------------
// Run-state persistence (crash-resume)

namespace {

constexpr std::uint32_t kStateMagic = 0x53525645; // "EVRS"
constexpr std::uint32_t kStateVersion = 1;

std::uint64_t mix_bits(std::uint64_t h, std::uint64_t v) {
    h ^= v + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
    return h;
}

std::uint64_t mix_double(std::uint64_t h, Scalar v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    return mix_bits(h, bits);
}

/// Fingerprint of everything that determines a run's result; a stale
/// state file from a different configuration is recomputed.
std::uint64_t run_fingerprint(const ExperimentConfig& cfg, const BatchEntry& entry,
                              int run_index, std::uint64_t walk_seed) {
    std::uint64_t h = 0x9AE16A3B2F90404Full;
    h = mix_bits(h, cfg.global_seed);
    h = mix_bits(h, static_cast<std::uint64_t>(run_index));
    h = mix_bits(h, walk_seed);
    for (char c : entry.label)
        h = mix_bits(h, static_cast<std::uint64_t>(c));
    const WalkConfig& w = entry.walk;
    h = mix_bits(h, static_cast<std::uint64_t>(w.kind));
    h = mix_double(h, w.top_fraction);
    h = mix_bits(h, static_cast<std::uint64_t>(w.length));
    h = mix_bits(h, static_cast<std::uint64_t>(w.metric.kind));
    h = mix_bits(h, static_cast<std::uint64_t>(w.metric.k));
    h = mix_double(h, w.metric.kde.bandwidth);
    h = mix_double(h, w.metric.kde.discount_lambda);
    h = mix_double(h, w.mutation.scale);
    h = mix_double(h, w.mutation.per_weight_prob);
    h = mix_bits(h, static_cast<std::uint64_t>(w.mutation.offspring_count));
    h = mix_bits(h, static_cast<std::uint64_t>(w.archive_capacity));
    h = mix_double(h, w.archive_admission_prob);
    h = mix_bits(h, static_cast<std::uint64_t>(cfg.network.input_dim));
    for (int d : cfg.network.hidden_dims)
        h = mix_bits(h, static_cast<std::uint64_t>(d));
    h = mix_bits(h, static_cast<std::uint64_t>(cfg.network.output_dim));
    return h;
}

void put_u32_stream(std::vector<std::uint8_t>& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i)
        buf.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

void put_u64_stream(std::vector<std::uint8_t>& buf, std::uint64_t v) {
    for (int i = 0; i < 8; ++i)
        buf.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

void put_f64_stream(std::vector<std::uint8_t>& buf, Scalar v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    put_u64_stream(buf, bits);
}

struct StateReader {
    const std::vector<std::uint8_t>& data;
    std::size_t offset = 0;

    std::uint32_t u32() {
        if (offset + 4 > data.size())
            throw std::runtime_error("run state truncated");
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(data[offset + i]) << (8 * i);
        offset += 4;
        return v;
    }
    std::uint64_t u64() {
        if (offset + 8 > data.size())
            throw std::runtime_error("run state truncated");
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(data[offset + i]) << (8 * i);
        offset += 8;
        return v;
    }
    Scalar f64() {
        const std::uint64_t bits = u64();
        Scalar v;
        std::memcpy(&v, &bits, sizeof(v));
        return v;
    }
};

void save_run_state(const std::filesystem::path& path, std::uint64_t fingerprint,
                    const RunSeries& series) {
    std::vector<std::uint8_t> buf;
    put_u32_stream(buf, kStateMagic);
    put_u32_stream(buf, kStateVersion);
    put_u64_stream(buf, fingerprint);
    put_u32_stream(buf, static_cast<std::uint32_t>(series.reports.size()));
    for (const MetricReport& r : series.reports) {
        put_f64_stream(buf, r.ls_max);
        put_f64_stream(buf, r.ls_expected);
        put_f64_stream(buf, r.evolvability_max);
        put_f64_stream(buf, r.evolvability_expected);
        put_f64_stream(buf, r.niche_coverage);
        put_f64_stream(buf, r.ratio_r);
        put_f64_stream(buf, r.ratio_r_star);
    }
    serialize_genotype(series.final_parent, buf);

    // Write-then-rename so an interrupted save never looks complete.
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (!out)
            throw std::runtime_error("cannot write run state: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::optional<RunSeries> load_run_state(const std::filesystem::path& path, std::uint64_t fingerprint) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        return std::nullopt;
    std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        StateReader r{buf};
        if (r.u32() != kStateMagic || r.u32() != kStateVersion)
            return std::nullopt;
        if (r.u64() != fingerprint)
            return std::nullopt;
        RunSeries series;
        const std::uint32_t steps = r.u32();
        series.reports.resize(steps);
        for (std::uint32_t s = 0; s < steps; ++s) {
            MetricReport& rep = series.reports[s];
            rep.ls_max = r.f64();
            rep.ls_expected = r.f64();
            rep.evolvability_max = r.f64();
            rep.evolvability_expected = r.f64();
            rep.niche_coverage = r.f64();
            rep.ratio_r = r.f64();
            rep.ratio_r_star = r.f64();
        }
        series.final_parent = deserialize_genotype(buf.data(), buf.size(), r.offset);
        return series;
    } catch (const std::exception&) {
        return std::nullopt; // corrupt or partial file: recompute
    }
}

} // namespace

std::vector<std::vector<RunSeries>> run_batch(const ExperimentConfig& cfg,
                                              const std::vector<BatchEntry>& entries,
                                              const std::string& command_tag) {
    const BehaviorFn phi = cfg.environment.make(cfg.network);
    const std::filesystem::path state_dir = cfg.output_dir / "state";
    std::filesystem::create_directories(state_dir);

    struct Job {
        std::size_t entry;
        int run;
    };
    std::vector<Job> jobs;
    for (std::size_t e = 0; e < entries.size(); ++e)
        for (int r = 0; r < cfg.runs_per_config; ++r)
            jobs.push_back({e, r});

    std::vector<std::vector<RunSeries>> results(entries.size());
    for (auto& per_entry : results)
        per_entry.resize(static_cast<std::size_t>(cfg.runs_per_config));

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string error_message;
    std::mutex error_mutex;

    auto execute = [&](const Job& job) {
        const BatchEntry& entry = entries[job.entry];
        const std::uint64_t walk_seed =
            derive_seed(cfg.global_seed, static_cast<std::uint64_t>(job.entry),
                        static_cast<std::uint64_t>(job.run));
        const std::uint64_t fingerprint = run_fingerprint(cfg, entry, job.run, walk_seed);
        const std::filesystem::path state_path =
            state_dir / (command_tag + "_" + std::to_string(job.entry) + "_" +
                         std::to_string(job.run) + ".evorun");

        if (auto cached = load_run_state(state_path, fingerprint)) {
            results[job.entry][static_cast<std::size_t>(job.run)] = std::move(*cached);
            return;
        }

        WalkConfig walk = entry.walk;
        walk.seed = walk_seed;
        const Genotype initial = xavier_init(cfg.network, derive_seed(walk_seed, stream::kInit));
        const WalkRecord record = run_walk(walk, initial, phi, cfg.grid);

        RunSeries series;
        series.reports.reserve(record.steps.size());
        for (const WalkStep& step : record.steps)
            series.reports.push_back(step.report);
        series.final_parent = record.final_parent;
        save_run_state(state_path, fingerprint, series);
        results[job.entry][static_cast<std::size_t>(job.run)] = std::move(series);
    };

    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();) {
            if (failed.load())
                return;
            try {
                execute(jobs[i]);
            } catch (const std::exception& ex) {
                std::lock_guard<std::mutex> lock(error_mutex);
                failed.store(true);
                if (error_message.empty())
                    error_message = ex.what();
            }
        }
    };

    const int thread_count =
        std::max(1, std::min<int>(cfg.parallelism, static_cast<int>(jobs.size())));
    if (thread_count == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(thread_count));
        for (int t = 0; t < thread_count; ++t)
            pool.emplace_back(worker);
        for (std::thread& t : pool)
            t.join();
    }
    if (failed.load())
        throw std::runtime_error("run_batch: " + error_message);
    return results;
}

// ---------------------------------------------------------------------------
// CSV / JSON emission

namespace {

const char* kSeriesHeader =
    "walk_kind,metric,top_fraction,run,step,ls_max,ls_expected,evolvability_max,"
    "evolvability_expected,niche_coverage,ratio_r,ratio_r_star,mean,ci95,run_count\n";

void write_series_csv(const std::filesystem::path& path, const std::vector<BatchEntry>& entries,
                      const std::vector<std::vector<RunSeries>>& results) {
    std::ostringstream out;
    out << kSeriesHeader;
    for (std::size_t e = 0; e < entries.size(); ++e) {
        const BatchEntry& entry = entries[e];
        const std::string kind = to_string(entry.walk.kind);
        const std::string metric = to_string(entry.walk.metric.kind);
        const std::string fraction =
            entry.top_fraction_tag >= 0 ? format_double(entry.top_fraction_tag) : "";

        for (std::size_t r = 0; r < results[e].size(); ++r) {
            const RunSeries& series = results[e][r];
            for (std::size_t s = 0; s < series.reports.size(); ++s) {
                const MetricReport& rep = series.reports[s];
                out << kind << ',' << metric << ',' << fraction << ',' << r << ',' << s << ','
                    << format_double(rep.ls_max) << ',' << format_double(rep.ls_expected) << ','
                    << format_double(rep.evolvability_max) << ','
                    << format_double(rep.evolvability_expected) << ','
                    << format_double(rep.niche_coverage) << ',' << format_double(rep.ratio_r)
                    << ',' << format_double(rep.ratio_r_star) << ",,,\n";
            }
        }

        std::vector<Vector> evo_series;
        evo_series.reserve(results[e].size());
        for (const RunSeries& series : results[e]) {
            Vector v(static_cast<Index>(series.reports.size()));
            for (std::size_t s = 0; s < series.reports.size(); ++s)
                v[static_cast<Index>(s)] = series.reports[s].evolvability_expected;
            evo_series.push_back(std::move(v));
        }
        const SeriesSummary summary = summarize(evo_series);
        for (Index s = 0; s < summary.mean.size(); ++s) {
            out << kind << ',' << metric << ',' << fraction << ",," << s << ",,,,,,,,"
                << format_double(summary.mean[s]) << ',' << format_double(summary.ci95_half_width[s])
                << ',' << summary.run_count << '\n';
        }
    }

    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    file << out.str();
    if (!file)
        throw std::runtime_error("cannot write " + path.string());
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    file << content;
    if (!file)
        throw std::runtime_error("cannot write " + path.string());
}

Scalar final_expected_evolvability(const RunSeries& series) {
    if (series.reports.empty())
        throw std::runtime_error("run produced no steps");
    return series.reports.back().evolvability_expected;
}

} // namespace

PressureSweepOutcome cmd_pressure_sweep(const ExperimentConfig& config) {
    ExperimentConfig cfg = config;
    cfg.finalize();
    if (cfg.sweep_top_fractions.size() < 2)
        throw std::invalid_argument("pressure-sweep: need at least 2 pressure levels");
    std::filesystem::create_directories(cfg.output_dir);

    std::vector<BatchEntry> entries;
    for (Scalar fraction : cfg.sweep_top_fractions) {
        BatchEntry entry;
        entry.label = "pressure_" + format_double(fraction);
        entry.top_fraction_tag = fraction;
        entry.walk.kind = WalkKind::adaptive;
        entry.walk.top_fraction = fraction;
        entry.walk.length = cfg.walk_length;
        entry.walk.metric = cfg.make_metric(cfg.sweep_metric);
        entry.walk.mutation = cfg.mutation;
        entry.walk.archive_capacity = cfg.archive_capacity;
        entry.walk.archive_admission_prob = cfg.archive_admission_prob;
        entries.push_back(std::move(entry));
    }

    const auto results = run_batch(cfg, entries, "pressure");

    // Selectivity grows as the eligible fraction shrinks.
    std::vector<Scalar> selectivity, final_evo;
    for (std::size_t e = 0; e < entries.size(); ++e) {
        for (const RunSeries& series : results[e]) {
            selectivity.push_back(1.0 / entries[e].walk.top_fraction);
            final_evo.push_back(final_expected_evolvability(series));
        }
    }
    const Correlation corr =
        spearman(Eigen::Map<const Vector>(selectivity.data(), static_cast<Index>(selectivity.size())),
                 Eigen::Map<const Vector>(final_evo.data(), static_cast<Index>(final_evo.size())));

    PressureSweepOutcome outcome;
    outcome.final_step = corr;
    outcome.top_fractions = cfg.sweep_top_fractions;
    for (std::size_t e = 0; e < entries.size(); ++e) {
        Scalar sum = 0;
        for (const RunSeries& series : results[e])
            sum += final_expected_evolvability(series);
        outcome.final_means.push_back(sum / static_cast<Scalar>(results[e].size()));
    }

    outcome.csv_path = cfg.output_dir / "pressure_sweep.csv";
    write_series_csv(outcome.csv_path, entries, results);

    json summary;
    summary["command"] = "pressure-sweep";
    summary["metric"] = cfg.sweep_metric;
    summary["top_fractions"] = cfg.sweep_top_fractions;
    summary["pressure"] = [&] {
        std::vector<Scalar> p;
        for (Scalar f : cfg.sweep_top_fractions)
            p.push_back(1.0 / f);
        return p;
    }();
    summary["final_step_means"] = outcome.final_means;
    summary["spearman_rho"] = corr.rho;
    summary["spearman_p"] = corr.p;
    summary["n"] = selectivity.size();
    outcome.json_path = cfg.output_dir / "pressure_spearman.json";
    write_text_file(outcome.json_path, summary.dump(2) + "\n");
    return outcome;
}

MetricComparisonOutcome cmd_metric_comparison(const ExperimentConfig& config) {
    ExperimentConfig cfg = config;
    cfg.finalize();
    if (cfg.comparison_metrics.size() < 2)
        throw std::invalid_argument("metric-comparison: need at least 2 metrics");
    std::filesystem::create_directories(cfg.output_dir);

    std::vector<BatchEntry> entries;
    for (const std::string& metric : cfg.comparison_metrics) {
        BatchEntry entry;
        entry.label = "metric_" + metric;
        entry.walk.kind = walk_kind_from_string(cfg.comparison_walk_kind);
        entry.walk.length = cfg.walk_length;
        entry.walk.metric = cfg.make_metric(metric);
        entry.walk.mutation = cfg.mutation;
        entry.walk.archive_capacity = cfg.archive_capacity;
        entry.walk.archive_admission_prob = cfg.archive_admission_prob;
        entries.push_back(std::move(entry));
    }

    const auto results = run_batch(cfg, entries, "metric");

    std::vector<std::vector<Scalar>> groups;
    MetricComparisonOutcome outcome;
    outcome.metrics = cfg.comparison_metrics;
    for (std::size_t e = 0; e < entries.size(); ++e) {
        std::vector<Scalar> group;
        for (const RunSeries& series : results[e])
            group.push_back(final_expected_evolvability(series));
        Scalar sum = 0;
        for (Scalar v : group)
            sum += v;
        outcome.final_means.push_back(sum / static_cast<Scalar>(group.size()));
        groups.push_back(std::move(group));
    }
    outcome.final_step = kruskal_wallis(groups);

    outcome.csv_path = cfg.output_dir / "metric_comparison.csv";
    write_series_csv(outcome.csv_path, entries, results);

    json summary;
    summary["command"] = "metric-comparison";
    summary["walk_kind"] = cfg.comparison_walk_kind;
    summary["metrics"] = cfg.comparison_metrics;
    summary["final_step_means"] = outcome.final_means;
    summary["kruskal_h"] = outcome.final_step.h;
    summary["kruskal_p"] = outcome.final_step.p;
    outcome.json_path = cfg.output_dir / "metric_kruskal.json";
    write_text_file(outcome.json_path, summary.dump(2) + "\n");
    return outcome;
}

MarkovOutcome cmd_markov_estimate(const ExperimentConfig& config) {
    ExperimentConfig cfg = config;
    cfg.finalize();
    std::filesystem::create_directories(cfg.output_dir);
    const BehaviorFn phi = cfg.environment.make(cfg.network);

    std::vector<Genotype> genotypes;
    for (int i = 0; i < cfg.markov_genotype_count; ++i)
        genotypes.push_back(
            xavier_init(cfg.network, derive_seed(cfg.global_seed, stream::kInit, static_cast<std::uint64_t>(i))));

    MarkovOutcome outcome;
    if (cfg.markov_transition_file) {
        std::ifstream in(*cfg.markov_transition_file);
        if (!in)
            throw std::runtime_error("cannot open transition file: " + cfg.markov_transition_file->string());
        outcome.transition = load_transition_matrix(in);
        if (outcome.transition.n() != cfg.grid.total_cells())
            throw std::runtime_error("transition file size does not match the configured grid");
    } else {
        outcome.transition = estimate_transition_matrix(cfg.grid, phi, cfg.mutation, genotypes,
                                                        cfg.markov_budget, cfg.global_seed);
    }

    const Index n = cfg.grid.total_cells();
    std::ostringstream table;
    table << "subject_kind,subject,l,u,repeats,sample_size,child_coverage,mean_coverage,std_error\n";
    std::ostringstream dists;

    for (std::size_t i = 0; i < genotypes.size(); ++i) {
        const std::uint64_t seed = derive_seed(cfg.global_seed, stream::kMarkov, static_cast<std::uint64_t>(i));
        const Vector d = child_distribution(genotypes[i], cfg.grid, phi, cfg.mutation,
                                            cfg.markov_params.sample_size, derive_seed(seed, stream::kInit));
        const LEvolvabilityEstimate estimate =
            l_evolvability_from_distribution(outcome.transition, d, cfg.markov_params, seed);
        const Scalar child_coverage =
            static_cast<Scalar>((d.array() > 0).count()) / static_cast<Scalar>(n);

        outcome.genotype_estimates.push_back(estimate);
        outcome.genotype_child_coverage.push_back(child_coverage);

        const std::string digest = digest_hex(genotype_digest(genotypes[i]));
        table << "genotype," << digest << ',' << estimate.l << ',' << estimate.u << ','
              << estimate.repeats << ',' << cfg.markov_params.sample_size << ','
              << format_double(child_coverage) << ',' << format_double(estimate.mean_coverage)
              << ',' << format_double(estimate.std_error) << '\n';

        dists << digest;
        for (Index c = 0; c < d.size(); ++c)
            dists << ' ' << format_double(d[c]);
        dists << '\n';
    }

    if (cfg.markov_per_niche) {
        for (Index niche = 0; niche < n; ++niche) {
            const Vector d = one_hot_distribution(n, niche);
            const LEvolvabilityEstimate estimate = l_evolvability_from_distribution(
                outcome.transition, d, cfg.markov_params,
                derive_seed(cfg.global_seed, stream::kMarkov, 0x100000ull + static_cast<std::uint64_t>(niche)));
            outcome.niche_estimates.push_back(estimate);
            table << "niche," << niche << ',' << estimate.l << ',' << estimate.u << ','
                  << estimate.repeats << ',' << cfg.markov_params.sample_size << ','
                  << format_double(1.0 / static_cast<Scalar>(n)) << ','
                  << format_double(estimate.mean_coverage) << ','
                  << format_double(estimate.std_error) << '\n';
        }
    }

    outcome.matrix_path = cfg.output_dir / "transition_matrix.txt";
    {
        std::ostringstream matrix;
        save_transition_matrix(matrix, outcome.transition);
        write_text_file(outcome.matrix_path, matrix.str());
    }
    outcome.table_path = cfg.output_dir / "l_evolvability.csv";
    write_text_file(outcome.table_path, table.str());
    write_text_file(cfg.output_dir / "child_distributions.txt", dists.str());
    return outcome;
}

DissimilaOutcome cmd_dissimila_scan(const ExperimentConfig& config) {
    ExperimentConfig cfg = config;
    cfg.finalize();
    std::filesystem::create_directories(cfg.output_dir);
    const BehaviorFn phi = cfg.environment.make(cfg.network);

    DissimilaOutcome outcome;
    for (int i = 0; i < cfg.dissimila_genotype_count; ++i) {
        const Genotype g =
            xavier_init(cfg.network, derive_seed(cfg.global_seed, stream::kInit, static_cast<std::uint64_t>(i)));
        const OffspringSet offspring = sample_neighbors(
            g, cfg.mutation, phi, derive_seed(cfg.global_seed, stream::kMutation, static_cast<std::uint64_t>(i)));

        DissimilaRow row;
        row.digest = genotype_digest(g);
        row.ls_expected = local_sensitivity_expected(offspring.parent_behavior, offspring.behaviors);
        row.evolvability_expected = evolvability_expected(offspring.behaviors);
        row.r_star = row.evolvability_expected / (row.ls_expected + kProtectedDivisionEpsilon);
        outcome.rows.push_back(row);
    }
    std::stable_sort(outcome.rows.begin(), outcome.rows.end(),
                     [](const DissimilaRow& a, const DissimilaRow& b) { return a.r_star < b.r_star; });

    std::ostringstream out;
    out << "genotype,ls_expected,evolvability_expected,r_star\n";
    for (const DissimilaRow& row : outcome.rows)
        out << digest_hex(row.digest) << ',' << format_double(row.ls_expected) << ','
            << format_double(row.evolvability_expected) << ',' << format_double(row.r_star) << '\n';

    outcome.csv_path = cfg.output_dir / "dissimila.csv";
    write_text_file(outcome.csv_path, out.str());
    return outcome;
}

} // namespace evoscape
