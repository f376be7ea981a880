#include "spine/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <fstream>
#include <json.hpp>
#include <ostream>

#include "spine/eval.hpp"
#include "spine/extract.hpp"
#include "spine/io.hpp"
#include "spine/parallel.hpp"
#include "spine/rng.hpp"
#include "spine/synth.hpp"

namespace spine::cli {

namespace {

struct BackboneArgs {
    std::string input;
    std::string model = "sdsm";
    double alpha = 0.05;
    int tails = 2;
    std::string correction = "none";
    std::string sdsm_method = "bicm";
    std::size_t trials = 1000;
    std::uint64_t seed = 0;
    std::string output;
    std::string format;
};

struct SynthArgs {
    std::size_t agents = 100;
    std::size_t artifacts = 100;
    double density = 0.1;
    std::string agent_shape = "right";
    std::string artifact_shape = "right";
    std::optional<double> planted_w;
    bool random_groups = false;
    std::uint64_t seed = 0;
    std::string output;
    std::string format;
};

struct StudyArgs {
    int id = 0;
    std::string preset = "desk";
    std::uint64_t seed = 1;
    std::string output_dir;
    std::optional<std::size_t> replicates;
    std::optional<std::size_t> trials;
};

std::optional<GraphFormat> format_flag(const std::string& f) {
    if (f.empty()) return std::nullopt;
    return parse_graph_format(f);
}

int do_backbone(const BackboneArgs& a, unsigned threads, std::ostream& out, std::ostream& err) {
    const LabeledGraph in = read_graph(a.input, format_flag(a.format));
    for (const auto& w : in.warnings) err << "warning: " << w << '\n';

    TestConfig cfg;
    cfg.model = parse_null_model(a.model);
    cfg.alpha = a.alpha;
    cfg.tails = a.tails == 1 ? TailMode::one : TailMode::two;
    cfg.correction = parse_correction(a.correction);
    cfg.sdsm_method = parse_cell_prob_method(a.sdsm_method);
    cfg.fdsm.trials = a.trials;
    cfg.fdsm.seed = a.seed;
    cfg.fdsm.workers = threads;
    cfg.workers = threads;
    cfg.validate();

    const BipartiteGraph& g = in.graph;
    const Projection p = project(g);
    const Backbone b = extract_backbone(g, cfg);
    write_backbone(b, p, in.agent_ids, a.output);

    const std::size_t t = test_count(p);
    const double family = tail_alpha(cfg.alpha, cfg.tails);
    out << "agents: " << g.agents() << "\nartifacts: " << g.artifacts() << "\ndensity: " << density(g)
        << "\nmodel: " << b.model_tag << "\ntests: " << t << "\nper-test alpha*: ";
    switch (cfg.correction) {
        case Correction::none: out << family; break;
        case Correction::bonferroni: out << (t ? family / static_cast<double>(t) : family); break;
        case Correction::holm:
        case Correction::fdr: out << "step-wise, family level " << family; break;
    }
    out << "\nretained edges: " << b.edge_count() << "\nbackbone density: " << b.edge_density() << '\n';
    for (const auto& w : b.warnings) err << "warning: " << w << '\n';
    return kOk;
}

int do_synth(const SynthArgs& a, std::ostream& out, std::ostream& err) {
    const DegreeShape as = DegreeShape::parse(a.agent_shape);
    const DegreeShape bs = DegreeShape::parse(a.artifact_shape);
    const std::uint64_t gen_seed = derive_seed(a.seed, {0});
    BipartiteGraph g = generate(a.agents, a.artifacts, a.density, as, bs, gen_seed);

    nlohmann::json manifest{{"agents", a.agents},
                            {"artifacts", a.artifacts},
                            {"target_density", a.density},
                            {"agent_shape", as.name},
                            {"artifact_shape", bs.name},
                            {"seed", a.seed},
                            {"generate_seed", gen_seed}};
    if (a.planted_w) {
        const std::uint64_t part_seed = derive_seed(a.seed, {1});
        const std::uint64_t plant_seed = derive_seed(a.seed, {2});
        const PlantedPartition part = random_partition(a.agents, a.artifacts, part_seed, !a.random_groups);
        const double before = within_fraction(g, part);
        PlantResult planted = plant_blocks(g, part, *a.planted_w, plant_seed);
        g = std::move(planted.graph);
        manifest["planted"] = {{"target_w", *a.planted_w},
                               {"initial_w", before},
                               {"realized_w", planted.within},
                               {"attained", planted.attained},
                               {"swaps", planted.swaps},
                               {"balanced_groups", !a.random_groups},
                               {"partition_seed", part_seed},
                               {"plant_seed", plant_seed},
                               {"agent_groups", part.agent_groups},
                               {"artifact_groups", part.artifact_groups}};
        if (!planted.attained)
            err << "warning: within-group fraction " << planted.within << " is below the target " << *a.planted_w
                << "; no further improving swaps were found\n";
    }
    manifest["realized_density"] = density(g);
    manifest["fill"] = g.fill();

    write_graph(label(std::move(g)), a.output, format_flag(a.format));
    std::ofstream(a.output + ".manifest.json") << manifest.dump(2) << '\n';
    out << "wrote " << a.output << " (density " << manifest["realized_density"].get<double>() << ")\n";
    return kOk;
}

template <typename Result>
void write_all(const Result& r, const std::filesystem::path& dir) {
    for (const auto& t : r.tables()) write_table(t, dir);
}

int do_study(const StudyArgs& a, unsigned threads, std::ostream& out) {
    const Preset preset = parse_preset(a.preset);
    const std::filesystem::path dir = a.output_dir;
    const auto start = std::chrono::steady_clock::now();
    nlohmann::json manifest{{"study", a.id}, {"preset", a.preset}, {"seed", a.seed}, {"threads", threads}};
    std::size_t total = 0;
    std::size_t failed = 0;
    auto count = [&](const auto& replicates) {
        for (const auto& r : replicates) {
            ++total;
            failed += !r.error.empty();
        }
    };

    switch (a.id) {
        case 1: {
            Study1Config c = Study1Config::preset(preset);
            c.seed = a.seed;
            c.workers = threads;
            const auto r = run_study1(c);
            write_all(r, dir);
            for (const auto& e : r.ensembles) {
                ++total;
                failed += std::none_of(e.accuracy.begin(), e.accuracy.end(), [](const auto& x) { return x.has_value(); });
            }
            for (auto m : c.methods) {
                out << to_string(m) << ": mean accuracy " << r.mean_accuracy(m) << " (" << r.failures(m)
                    << " failed)\n";
                manifest["mean_accuracy"][std::string(to_string(m))] = r.mean_accuracy(m);
            }
            manifest["ensembles"] = r.ensembles.size();
            break;
        }
        case 2: {
            Study2Config c = Study2Config::preset(preset);
            c.seed = a.seed;
            c.workers = threads;
            if (a.replicates) c.replicates = *a.replicates;
            if (a.trials) c.trials = *a.trials;
            const auto r = run_study2(c);
            write_all(r, dir);
            count(r.replicates);
            const auto best = r.mean_curve_argmax();
            out << "mean curve peaks at alpha " << best.alpha << " with J " << best.value << '\n';
            manifest["replicates"] = c.replicates;
            manifest["trials"] = c.trials;
            manifest["argmax_alpha"] = best.alpha;
            manifest["max_mean_jaccard"] = best.value;
            break;
        }
        case 3: {
            Study3Config c = Study3Config::preset(preset);
            c.seed = a.seed;
            c.workers = threads;
            if (a.replicates) c.replicates = *a.replicates;
            if (a.trials) c.trials = *a.trials;
            const auto r = run_study3(c);
            write_all(r, dir);
            count(r.replicates);
            double sum = 0.0;
            std::size_t cells = 0;
            for (const auto& cell : r.cells())
                if (cell.ok) {
                    sum += cell.optimal.value;
                    ++cells;
                }
            out << "mean SDSM-FDSM Jaccard at the per-cell optimal alpha: " << (cells ? sum / cells : 0.0) << '\n';
            manifest["replicates"] = c.replicates;
            manifest["trials"] = c.trials;
            break;
        }
        case 4: {
            Study4Config c = Study4Config::preset(preset);
            c.seed = a.seed;
            c.workers = threads;
            if (a.replicates) c.replicates = *a.replicates;
            if (a.trials) c.trials = *a.trials;
            const auto r = run_study4(c);
            write_all(r, dir);
            count(r.replicates);
            const std::size_t last = c.ws.size() - 1;
            for (std::size_t line = 0; line < kStudy4Lines; ++line)
                out << study4_line_name(line) << ": mean Q at W=" << c.ws[last] << " is "
                    << r.summary(last, line).mean << '\n';
            manifest["replicates"] = c.replicates;
            manifest["trials"] = c.trials;
            break;
        }
        default: throw std::invalid_argument("study id must be 1, 2, 3 or 4");
    }
    manifest["conditions"] = total;
    manifest["failed_conditions"] = failed;
    manifest["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::filesystem::create_directories(dir);
    std::ofstream(dir / ("study" + std::to_string(a.id) + "_manifest.json")) << manifest.dump(2) << '\n';
    out << "wrote tables to " << dir.string() << " (" << failed << " of " << total << " conditions failed)\n";
    return total > 0 && failed == total ? kModelFailure : kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Statistically significant backbones of bipartite projections", "spine"};
    app.require_subcommand(1);
    unsigned threads = 0;
    app.add_option("--threads", threads, "Worker threads (default: SPINE_THREADS or all cores)");

    BackboneArgs ba;
    auto* bb = app.add_subcommand("backbone", "Extract a backbone from a bipartite graph");
    bb->add_option("input", ba.input, "Edge list, or dense matrix if the name ends in .csv")->required();
    bb->add_option("--model", ba.model, "Null model")->check(CLI::IsMember({"ffm", "frm", "fcm", "sdsm", "fdsm"}));
    bb->add_option("--alpha", ba.alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
    bb->add_option("--tails", ba.tails, "One- or two-tailed test")->check(CLI::IsMember({1, 2}));
    bb->add_option("--correction", ba.correction, "Familywise correction")
        ->check(CLI::IsMember({"none", "bonferroni", "holm", "fdr"}));
    bb->add_option("--sdsm-method", ba.sdsm_method, "SDSM cell probability estimator")
        ->check(CLI::IsMember({"rcf", "lpm", "lpm_i", "logit", "logit_i", "bicm"}));
    bb->add_option("--trials", ba.trials, "FDSM Monte Carlo trials")->check(CLI::PositiveNumber);
    bb->add_option("--seed", ba.seed, "Master seed");
    bb->add_option("--output", ba.output, "Output prefix")->required();
    bb->add_option("--format", ba.format, "Input format override")->check(CLI::IsMember({"edges", "dense"}));
    bb->add_option("--threads", threads, "Worker threads");

    SynthArgs sa;
    auto* sy = app.add_subcommand("synth", "Generate a synthetic bipartite graph");
    sy->add_option("--agents", sa.agents)->check(CLI::PositiveNumber);
    sy->add_option("--artifacts", sa.artifacts)->check(CLI::PositiveNumber);
    sy->add_option("--density", sa.density)->check(CLI::Range(0.0, 1.0));
    const auto shapes = CLI::IsMember({"right", "left", "uniform", "constant", "normal"});
    sy->add_option("--agent-shape", sa.agent_shape)->check(shapes);
    sy->add_option("--artifact-shape", sa.artifact_shape)->check(shapes);
    sy->add_option("--planted-w", sa.planted_w, "Target within-group edge fraction")->check(CLI::Range(0.0, 1.0));
    sy->add_flag("--random-groups", sa.random_groups, "Assign groups by coin flip instead of a balanced split");
    sy->add_option("--seed", sa.seed);
    sy->add_option("--output", sa.output)->required();
    sy->add_option("--format", sa.format, "Output format override")->check(CLI::IsMember({"edges", "dense"}));

    StudyArgs st;
    auto* su = app.add_subcommand("study", "Run one of the comparative studies");
    su->add_option("--id", st.id)->required()->check(CLI::Range(1, 4));
    su->add_option("--preset", st.preset)->check(CLI::IsMember({"paper", "desk"}));
    su->add_option("--seed", st.seed);
    su->add_option("--output-dir", st.output_dir)->required();
    su->add_option("--replicates", st.replicates, "Override the preset replicate count")->check(CLI::PositiveNumber);
    su->add_option("--trials", st.trials, "Override the FDSM trial count")->check(CLI::PositiveNumber);
    su->add_option("--threads", threads, "Worker threads");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }

    const unsigned workers = resolve_workers(threads);
    try {
        if (bb->parsed()) return do_backbone(ba, workers, out, err);
        if (sy->parsed()) return do_synth(sa, out, err);
        return do_study(st, workers, out);
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const GenerationError& e) {
        err << "error: " << e.what() << '\n';
        return kGenerationFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return sy->parsed() ? kGenerationFailure : kModelFailure;
    }
}

}  // namespace spine::cli
