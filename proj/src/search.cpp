#include "repval/search.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace repval {

std::vector<std::size_t> SearchConfig::stage_sizes() const {
    const std::size_t top = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(m))));
    std::vector<std::size_t> out(stages);
    for (std::size_t s = 0; s < stages; ++s) out[s] = std::max<std::size_t>(1, top > s ? top - s : 1);
    return out;
}

double SearchConfig::default_schedule_steps() const {
    double total = 0;
    for (auto sz : stage_sizes()) total += static_cast<double>(sz - 1) / 2.0;
    return total;
}

SearchConfig SearchConfig::from_params(double eps_prime, double eta, double c_prime,
                                       std::size_t answer_bits, std::size_t index_bits) {
    if (eps_prime <= 0 || eps_prime >= 1) throw InvariantError("search: eps' must be in (0,1)");
    if (eta <= 0 || eta >= 1) throw InvariantError("search: eta must be in (0,1)");
    SearchConfig cfg;
    cfg.eps_prime = eps_prime;
    cfg.eta = eta;
    cfg.c_prime = c_prime;
    cfg.m = static_cast<std::size_t>(std::ceil(1.0 / eps_prime));
    const double h = c_prime * std::log2(1.0 / eta) / eps_prime;
    cfg.q = std::max<std::size_t>(1, static_cast<std::size_t>(
                                        std::ceil(h / static_cast<double>(cfg.m))));
    cfg.answer_bits = answer_bits;
    cfg.index_bits = index_bits;
    return cfg;
}

std::string search_outcome_to_json(const SearchOutcome& o, const SearchConfig& cfg) {
    nlohmann::json out;
    out["accept_prob"] = o.accept_prob;
    out["ci"] = o.ci;
    out["q"] = cfg.q;
    out["m"] = cfg.m;
    out["T"] = o.qubits_exchanged;
    out["bound"] = std::pow(1.0 / 3.0 + std::exp(-1.0), static_cast<double>(cfg.q));
    out["samples"] = o.samples;
    out["exact"] = o.exact;
    if (o.found_index)
        out["found_index"] = *o.found_index;
    else
        out["found_index"] = nullptr;
    return out.dump(2);
}

double grover_success_probability(std::size_t m, std::size_t marked, std::size_t r) {
    if (marked == 0) return 0.0;
    if (marked >= m) return 1.0;
    const double theta = std::asin(std::sqrt(static_cast<double>(marked) / static_cast<double>(m)));
    const double s = std::sin((2.0 * static_cast<double>(r) + 1.0) * theta);
    return s * s;
}

double grover_success_probability_full(std::size_t m, std::size_t marked, std::size_t r) {
    if (m == 0) throw InvariantError("group size must be >= 1");
    std::vector<double> amp(m, 1.0 / std::sqrt(static_cast<double>(m)));
    for (std::size_t it = 0; it < r; ++it) {
        for (std::size_t i = 0; i < marked; ++i) amp[i] = -amp[i];  // oracle phase
        double mean = 0;
        for (double v : amp) mean += v;
        mean /= static_cast<double>(m);
        for (double& v : amp) v = 2 * mean - v;  // inversion about the mean
    }
    double p = 0;
    for (std::size_t i = 0; i < marked; ++i) p += amp[i] * amp[i];
    return p;
}

namespace {

double stage_hit_probability(std::size_t m, std::size_t marked, std::size_t stage_size) {
    double g = 0;
    for (std::size_t r = 0; r < stage_size; ++r) g += grover_success_probability(m, marked, r);
    return g / static_cast<double>(stage_size);
}

double group_fail_probability(std::size_t m, std::size_t marked,
                              const std::vector<std::size_t>& stage_sizes) {
    if (marked == 0) return 1.0;
    double fail = 1.0;
    for (auto sz : stage_sizes) fail *= 1.0 - stage_hit_probability(m, marked, sz);
    return fail;
}

}  // namespace

double grover_group_search_prob(const std::vector<bool>& marked, std::size_t stages) {
    const std::size_t m = marked.size();
    if (m == 0) throw InvariantError("group size must be >= 1");
    const std::size_t cnt = static_cast<std::size_t>(std::count(marked.begin(), marked.end(), true));
    SearchConfig cfg;
    cfg.m = m;
    cfg.stages = stages;
    return 1.0 - group_fail_probability(m, cnt, cfg.stage_sizes());
}

GroupRun grover_group_search_run(const std::vector<bool>& marked, Rng& rng, std::size_t stages) {
    const std::size_t m = marked.size();
    if (m == 0) throw InvariantError("group size must be >= 1");
    std::vector<std::size_t> marked_idx, unmarked_idx;
    for (std::size_t i = 0; i < m; ++i)
        (marked[i] ? marked_idx : unmarked_idx).push_back(i);
    SearchConfig cfg;
    cfg.m = m;
    cfg.stages = stages;
    GroupRun run;
    for (auto sz : cfg.stage_sizes()) {
        const std::size_t r = static_cast<std::size_t>(rng.integer(sz));
        run.steps += r;
        // measure: hit the marked subspace with the exact stage probability
        const double hit =
            marked_idx.empty() ? 0.0 : grover_success_probability(m, marked_idx.size(), r);
        if (rng.uniform() < hit) {
            const std::size_t candidate = marked_idx[rng.integer(marked_idx.size())];
            if (marked[candidate]) {  // classical verification gate
                run.found = candidate;
                return run;
            }
        }
        // a measured unmarked index fails verification; the stage just ends
    }
    return run;
}

double protocol_accept_exact(std::size_t n, std::size_t losing, const SearchConfig& cfg) {
    if (losing > n) throw InvariantError("losing count exceeds n");
    if (cfg.h() > n) throw InvariantError("sample count h exceeds n");
    const double rho = static_cast<double>(losing) / static_cast<double>(n);
    const auto sizes = cfg.stage_sizes();
    // per-group marked count is Binomial(m, rho) under i.i.d. sampling
    double per_group = 0.0;
    double log_choose = 0.0;
    for (std::size_t b = 0; b <= cfg.m; ++b) {
        if (b > 0)
            log_choose += std::log(static_cast<double>(cfg.m - b + 1)) -
                          std::log(static_cast<double>(b));
        double logp = log_choose;
        if (b > 0) {
            if (rho == 0) continue;
            logp += static_cast<double>(b) * std::log(rho);
        }
        if (b < cfg.m) {
            if (rho == 1) continue;
            logp += static_cast<double>(cfg.m - b) * std::log(1 - rho);
        }
        per_group += std::exp(logp) * group_fail_probability(cfg.m, b, sizes);
    }
    return std::pow(per_group, static_cast<double>(cfg.q));
}

SearchOutcome protocol_run(const std::vector<bool>& loss_indicator, const SearchConfig& cfg,
                           std::size_t samples, std::uint64_t seed) {
    const std::size_t n = loss_indicator.size();
    if (cfg.h() > n) throw InvariantError("sample count h exceeds n");
    if (samples < 1) throw InvariantError("samples must be >= 1");
    const auto sizes = cfg.stage_sizes();

    SearchOutcome out;
    out.samples = samples;
    Rng root = Rng::seeded(seed);

    std::vector<double> values(samples);
    for (std::size_t s = 0; s < samples; ++s) {
        Rng rng = root.child(s);
        double accept = 1.0;
        for (std::size_t g = 0; g < cfg.q; ++g) {
            std::size_t b = 0;
            for (std::size_t t = 0; t < cfg.m; ++t)
                if (loss_indicator[rng.integer(n)]) ++b;
            accept *= group_fail_probability(cfg.m, b, sizes);
        }
        values[s] = accept;
    }
    // order-independent aggregation: fixed-order compensated sums
    double sum = 0, comp = 0;
    for (double v : values) {
        const double y = v - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    out.accept_prob = sum / static_cast<double>(samples);
    double sq = 0, sqc = 0;
    for (double v : values) {
        const double d = (v - out.accept_prob) * (v - out.accept_prob);
        const double y = d - sqc;
        const double t = sq + y;
        sqc = (t - sq) - y;
        sq = t;
    }
    const double stderr_mean =
        samples > 1 ? std::sqrt(sq / static_cast<double>(samples - 1) / static_cast<double>(samples))
                    : 0.0;
    out.ci = 3.0 * stderr_mean;

    // one sampled trace for the found-coordinate report
    Rng trace = root.child(samples + 1);
    std::vector<std::size_t> coords(cfg.h());
    for (auto& c : coords) c = static_cast<std::size_t>(trace.integer(n));
    for (std::size_t g = 0; g < cfg.q && !out.found_index; ++g) {
        std::vector<bool> group_marked(cfg.m);
        for (std::size_t t = 0; t < cfg.m; ++t) group_marked[t] = loss_indicator[coords[g * cfg.m + t]];
        const GroupRun run = grover_group_search_run(group_marked, trace, cfg.stages);
        if (run.found) {
            const std::size_t coordinate = coords[g * cfg.m + *run.found];
            if (!loss_indicator[coordinate])
                throw Error("search reported a winning coordinate as losing");
            out.found_index = coordinate;
        }
    }
    out.qubits_exchanged = comm_cost(cfg, cfg.default_schedule_steps());
    return out;
}

std::size_t comm_cost(const SearchConfig& cfg, double grover_steps_per_group) {
    const double t = static_cast<double>(cfg.q) * grover_steps_per_group *
                     static_cast<double>(cfg.answer_bits + cfg.index_bits) * 2.0;
    return static_cast<std::size_t>(std::llround(t));
}

}  // namespace repval
