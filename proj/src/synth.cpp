#include "spine/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "spine/fdsm.hpp"
#include "spine/oracle.hpp"
#include "spine/rng.hpp"

namespace spine {

std::vector<DegreeShape> DegreeShape::presets() {
    return {right(), left(), uniform(), constant(), normal()};
}

DegreeShape DegreeShape::parse(std::string_view name) {
    for (const auto& s : presets())
        if (s.name == name) return s;
    throw std::invalid_argument("unknown degree shape '" + std::string(name) +
                                "' (expected right, left, uniform, constant or normal)");
}

namespace {

double draw_beta(Rng& rng, double a, double b) {
    std::gamma_distribution<double> ga(a, 1.0);
    std::gamma_distribution<double> gb(b, 1.0);
    const double x = ga(rng);
    const double y = gb(rng);
    return x + y > 0.0 ? x / (x + y) : 0.5;
}

}  // namespace

std::vector<int> apportion(const std::vector<double>& weights, long total, int cap) {
    const std::size_t k = weights.size();
    if (total < 0 || cap < 0 || total > static_cast<long>(cap) * static_cast<long>(k))
        throw std::invalid_argument("apportion: total cannot be split under the cap");
    std::vector<double> w(weights);
    if (std::accumulate(w.begin(), w.end(), 0.0) <= 0.0) std::fill(w.begin(), w.end(), 1.0);

    // Entries whose share would exceed the cap are pinned there and the rest
    // of the total is spread over the others.
    std::vector<double> quota(k, 0.0);
    std::vector<bool> pinned(k, false);
    double left = static_cast<double>(total);
    for (bool changed = true; changed;) {
        changed = false;
        double mass = 0.0;
        for (std::size_t i = 0; i < k; ++i)
            if (!pinned[i]) mass += w[i];
        for (std::size_t i = 0; i < k; ++i) {
            if (pinned[i]) continue;
            quota[i] = mass > 0.0 ? left * w[i] / mass : 0.0;
            if (quota[i] > cap) {
                pinned[i] = true;
                quota[i] = cap;
                left -= cap;
                changed = true;
            }
        }
    }

    std::vector<int> out(k);
    long assigned = 0;
    for (std::size_t i = 0; i < k; ++i) {
        out[i] = std::min(cap, static_cast<int>(std::floor(quota[i])));
        assigned += out[i];
    }
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return quota[a] - std::floor(quota[a]) > quota[b] - std::floor(quota[b]);
    });
    while (assigned < total) {
        for (std::size_t i : order) {
            if (assigned == total) break;
            if (out[i] < cap) {
                ++out[i];
                ++assigned;
            }
        }
    }
    return out;
}

BipartiteGraph generate(std::size_t agents, std::size_t artifacts, double density, const DegreeShape& agent_shape,
                        const DegreeShape& artifact_shape, std::uint64_t seed) {
    if (agents < 1 || artifacts < 1) throw std::invalid_argument("generate: both sides need at least one node");
    if (!(density > 0.0 && density < 1.0)) throw std::invalid_argument("generate: density must lie in (0,1)");
    const long cells = static_cast<long>(agents) * static_cast<long>(artifacts);
    const long fill = std::lround(density * static_cast<double>(cells));
    if (fill < 1 || fill >= cells) throw GenerationError("generate: density rounds to an empty or full matrix");

    for (std::uint64_t attempt = 0; attempt < 100; ++attempt) {
        Rng rng(derive_seed(seed, {attempt, 0}));
        std::vector<double> a(agents);
        std::vector<double> b(artifacts);
        for (auto& x : a) x = draw_beta(rng, agent_shape.beta_a, agent_shape.beta_b);
        for (auto& x : b) x = draw_beta(rng, artifact_shape.beta_a, artifact_shape.beta_b);
        const auto r = apportion(a, fill, static_cast<int>(artifacts));
        const auto c = apportion(b, fill, static_cast<int>(agents));
        if (!is_bigraphic(r, c)) continue;
        BipartiteGraph g = realize(r, c, derive_seed(seed, {attempt, 1}));
        CurveballSampler shuffle(std::move(g), derive_seed(seed, {attempt, 2}), CurveballSchedule{100 * agents, 0});
        return shuffle.sample();
    }
    throw GenerationError("generate: no realizable degree sequences after 100 attempts");
}

void PlantedPartition::validate(std::size_t agents, std::size_t artifacts) const {
    auto both = [](const std::vector<int>& groups) {
        bool zero = false;
        bool one = false;
        for (int x : groups) {
            if (x != 0 && x != 1) return false;
            zero |= x == 0;
            one |= x == 1;
        }
        return zero && one;
    };
    if (agent_groups.size() != agents || artifact_groups.size() != artifacts)
        throw std::invalid_argument("partition size does not match the graph");
    if (!both(agent_groups) || !both(artifact_groups))
        throw std::invalid_argument("each side of the partition needs both groups, labelled 0 and 1");
}

PlantedPartition random_partition(std::size_t agents, std::size_t artifacts, std::uint64_t seed, bool balanced) {
    if (agents < 2 || artifacts < 2) throw std::invalid_argument("random_partition: need two nodes per side");
    Rng rng(seed);
    auto side = [&](std::size_t k) {
        std::vector<int> groups(k);
        if (balanced) {
            for (std::size_t i = 0; i < k; ++i) groups[i] = i < (k + 1) / 2 ? 0 : 1;
            std::shuffle(groups.begin(), groups.end(), rng);
            return groups;
        }
        for (;;) {
            for (auto& x : groups) x = static_cast<int>(rng.below(2));
            const auto ones = std::count(groups.begin(), groups.end(), 1);
            if (ones > 0 && static_cast<std::size_t>(ones) < k) return groups;
        }
    };
    PlantedPartition part;
    part.agent_groups = side(agents);
    part.artifact_groups = side(artifacts);
    return part;
}

double within_fraction(const BipartiteGraph& g, const PlantedPartition& part) {
    part.validate(g.agents(), g.artifacts());
    if (g.fill() == 0) throw std::domain_error("within_fraction: graph has no edges");
    long within = 0;
    for (std::size_t i = 0; i < g.agents(); ++i)
        for (std::size_t k : g.row_items(i)) within += part.agent_groups[i] == part.artifact_groups[k];
    return static_cast<double>(within) / static_cast<double>(g.fill());
}

PlantResult plant_blocks(const BipartiteGraph& g, const PlantedPartition& part, double target, std::uint64_t seed) {
    if (!(target >= 0.0 && target <= 1.0)) throw std::invalid_argument("plant_blocks: target must lie in [0,1]");
    part.validate(g.agents(), g.artifacts());
    if (g.fill() == 0) throw std::domain_error("plant_blocks: graph has no edges");

    PlantResult res{g, 0.0, false, 0};
    BipartiteGraph& h = res.graph;
    const auto& ga = part.agent_groups;
    const auto& gk = part.artifact_groups;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> cross;
    long within = 0;
    for (std::size_t i = 0; i < h.agents(); ++i)
        for (std::size_t k : h.row_items(i)) {
            if (ga[i] == gk[k])
                ++within;
            else
                cross.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(k));
        }

    const long fill = h.fill();
    const auto need = static_cast<long>(std::ceil(target * static_cast<double>(fill) - 1e-9));
    const long patience = 50 * fill;
    Rng rng(seed);
    long failures = 0;
    while (within < need && cross.size() >= 2 && failures <= patience) {
        std::size_t a = rng.below(cross.size());
        std::size_t b = rng.below(cross.size() - 1);
        if (b >= a) ++b;
        const auto [i, k] = cross[a];
        const auto [j, l] = cross[b];
        if (ga[i] == ga[j] || h.at(i, l) || h.at(j, k)) {
            ++failures;
            continue;
        }
        h.set(i, k, false);
        h.set(j, l, false);
        h.set(i, l, true);
        h.set(j, k, true);
        if (a < b) std::swap(a, b);
        cross[a] = cross.back();
        cross.pop_back();
        cross[b] = cross.back();
        cross.pop_back();
        within += 2;
        ++res.swaps;
        failures = 0;
    }
    res.within = static_cast<double>(within) / static_cast<double>(fill);
    res.attained = within >= need;
    return res;
}

}  // namespace spine
