#include <chrono>
#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <httplib.h>

#include "affinity/affinity.hpp"
#include "affinity/datastore.hpp"
#include "affinity/embedding.hpp"
#include "affinity/error.hpp"
#include "affinity/evaluation.hpp"
#include "affinity/learning.hpp"
#include "affinity/lexicon.hpp"
#include "affinity/ranking.hpp"
#include "service/http.hpp"
#include "service/service.hpp"

#ifndef AFFINITY_FIXTURES_DIR
#define AFFINITY_FIXTURES_DIR "fixtures"
#endif

namespace fs = std::filesystem;
using namespace affinity;

namespace {

struct Globals {
    std::string config_path;
    std::string format = "text";
    std::uint64_t seed = 42;
    std::string fixtures = AFFINITY_FIXTURES_DIR;
    std::string lexicon;
};

struct Context {
    service::ServiceConfig config;
    fs::path fixtures;
    bool json = false;
    std::uint64_t seed = 42;
};

Context make_context(const Globals& g) {
    Context ctx;
    ctx.fixtures = g.fixtures;
    ctx.json = g.format == "json";
    ctx.seed = g.seed;
    if (!g.config_path.empty()) {
        const fs::path path(g.config_path);
        ctx.config = service::load_service_config(parse_json(read_file(path), "config " + path.string()),
                                                  path.parent_path());
    }
    if (!g.lexicon.empty()) ctx.config.lexicon_path = g.lexicon;
    if (ctx.config.lexicon_path.empty()) ctx.config.lexicon_path = ctx.fixtures / "lexicon" / "default.json";
    return ctx;
}

Lexicon lexicon_of(const Context& ctx) { return load_lexicon_file(ctx.config.lexicon_path, ctx.config.engine); }

std::vector<ResponseExpression> read_responses(const fs::path& path, const EngineConfig& config) {
    return parse_responses_jsonl(read_file(path), config.rating_max);
}

std::vector<double> parse_vector(const std::string& text) {
    std::vector<double> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            fail(ErrorCode::ParseError, "cannot parse '" + item + "' as a number");
        }
    }
    return out;
}

std::vector<FeatureKind> parse_kinds(const std::string& text) {
    std::vector<FeatureKind> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ','))
        if (!item.empty()) out.push_back(feature_kind_from_string(item));
    return out;
}

void emit(const Context& ctx, const Json& doc, const std::string& text) {
    if (ctx.json) std::cout << doc.dump(2) << '\n';
    else std::cout << text;
}

std::string vector_text(std::span<const double> v) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(4);
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? " " : "") << v[i];
    return out.str();
}

int cmd_lexicon_validate(const Context& ctx, const std::string& file) {
    const auto lex = load_lexicon_file(file, ctx.config.engine);
    Json doc{{"valid", true},
             {"dimensions", lex.taxonomy().names},
             {"contexts", lex.contexts()},
             {"words", lex.words().size()},
             {"features", lex.features().size()}};
    std::ostringstream text;
    text << "ok: " << lex.words().size() << " words in " << lex.contexts().size() << " contexts, "
         << lex.features().size() << " feature mappings, " << lex.dims() << " dimensions\n";
    emit(ctx, doc, text.str());
    return 0;
}

int cmd_learn(const Context& ctx, const std::string& responses_file, const std::string& store_dir,
              const std::string& variants_file, int k, const std::string& out) {
    const auto& cfg = ctx.config.engine;
    std::vector<ResponseExpression> responses;
    VariantCatalog variants;
    if (!store_dir.empty()) {
        ProfileStore store(store_dir, cfg);
        responses = service::training_responses(store);
        variants = store.variants();
    } else {
        responses = read_responses(responses_file, cfg);
        if (!variants_file.empty()) variants = parse_variant_catalog(parse_json(read_file(variants_file), "variants"));
    }
    auto model = cluster_candidates(group_by_candidate(responses), k > 0 ? k : cfg.num_classes, cfg);
    if (!variants.empty()) attach_medoid_profiles(model, lexicon_of(ctx), variants, cfg);
    const auto doc = serialize_model(model);
    if (!out.empty()) atomic_write(out, doc);

    std::ostringstream text;
    text << "clusters: " << model.k << "  candidates: " << model.assignments.size() << "  objective: " << std::fixed
         << std::setprecision(4) << model.objective << "  swaps: " << model.iterations
         << (model.hit_iteration_cap ? " (iteration cap reached)" : "") << '\n';
    for (const auto& m : model.medoids) {
        const auto members = std::count_if(model.assignments.begin(), model.assignments.end(),
                                           [&](const auto& a) { return a.second == m.cls; });
        text << "  class " << m.cls.value << ": medoid " << m.candidate_id << ", " << members << " members\n";
    }
    emit(ctx, parse_json(doc, "model"), text.str());
    return 0;
}

int cmd_classify(const Context& ctx, const std::string& model_file, const std::string& responses_file,
                 const std::string& candidate) {
    const auto& cfg = ctx.config.engine;
    const auto model = load_model(read_file(model_file), cfg);
    const auto grouped = group_by_candidate(read_responses(responses_file, cfg));
    Json doc = Json::object();
    std::ostringstream text;
    for (const auto& [id, responses] : grouped) {
        if (!candidate.empty() && id != candidate) continue;
        const auto cls = classify_candidate(responses, model, cfg);
        doc[id] = cls.value;
        text << id << '\t' << cls.value << '\n';
    }
    if (!candidate.empty() && doc.empty())
        fail(ErrorCode::UnknownCandidate, "no responses for candidate '" + candidate + "'");
    emit(ctx, doc, text.str());
    return 0;
}

int cmd_embed(const Context& ctx, const std::string& template_file, const std::string& target_text,
              const std::string& kinds_text) {
    const auto lex = lexicon_of(ctx);
    const auto tmpl = load_template(read_file(template_file));
    const auto target = EmotionVector::from_weights(parse_vector(target_text));
    const auto kinds = parse_kinds(kinds_text);
    const auto base = select_features(target, lex, kinds);
    const auto v = embed_headline(tmpl, target, lex, ctx.config.engine, base);
    Json doc{{"headline", v.text()},
             {"tokens", v.headline},
             {"features", v.features},
             {"profile", v.profile},
             {"score", v.score},
             {"search", v.exhaustive ? "exhaustive" : "greedy"}};
    std::ostringstream text;
    text << v.text() << "\nfeatures: " << v.features.canonical_key() << "\nprofile: " << vector_text(v.profile.values())
         << "\nscore: " << std::fixed << std::setprecision(6) << v.score << '\n';
    emit(ctx, doc, text.str());
    return 0;
}

int cmd_rank(const Context& ctx, const std::string& reader_text, const std::string& items_file) {
    const auto reader = EmotionVector::from_weights(parse_vector(reader_text));
    const auto items_doc = parse_json(read_file(items_file), "items");
    std::vector<ItemProfile> items;
    for (const auto& node : items_doc.is_array() ? items_doc : items_doc.at("items"))
        items.push_back({node.at("id").get<std::string>(), emotion_vector_from_json(node.at("profile"))});
    const auto ranking = rank_items(reader, items);
    Json doc = Json::array();
    std::ostringstream text;
    text << std::fixed << std::setprecision(6);
    for (const auto& r : ranking) {
        doc.push_back({{"item_id", r.item_id}, {"score", r.score}, {"rank", r.rank}});
        text << r.rank << '\t' << r.item_id << '\t' << r.score << '\n';
    }
    emit(ctx, doc, text.str());
    return 0;
}

int eval_fixture(const Context& ctx, const std::string& fixture) {
    const auto dir = ctx.fixtures / "paper";
    if (fixture == "paper/table1") {
        const auto t1 = load_survey_fixture(dir / "table1.json", ctx.config.engine);
        const auto grouped = group_by_candidate(t1.responses);
        Json doc{{"rows", t1.rows.size()}, {"out_of_range", Json::array()}, {"affinity", Json::array()}};
        std::ostringstream text;
        for (const auto& o : t1.out_of_range) {
            doc["out_of_range"].push_back({{"candidate", o.candidate}, {"cluster", o.cluster}, {"raw", o.raw}});
            text << "warning: candidate " << o.candidate << " cluster " << o.cluster << " rating " << o.raw
                 << " outside [0, " << ctx.config.engine.rating_max << "], clamped\n";
        }
        const auto m = affinity_matrix(grouped, ctx.config.engine);
        text << std::fixed << std::setprecision(3);
        for (std::size_t i = 0; i < m.ids.size(); ++i) {
            Json row = Json::array();
            text << std::left << std::setw(10) << m.ids[i];
            for (std::size_t j = 0; j < m.ids.size(); ++j) {
                row.push_back(m.at(i, j));
                text << ' ' << m.at(i, j);
            }
            doc["affinity"].push_back(row);
            text << '\n';
        }
        doc["ids"] = m.ids;
        emit(ctx, doc, text.str());
        return 0;
    }
    if (fixture == "paper/table2") {
        const auto cmp = load_rank_fixture(dir / "table2.json");
        emit(ctx, rank_comparison_json(cmp), rank_comparison_text(cmp));
        return 0;
    }
    if (fixture == "paper/table3") {
        const auto report = replay_class_accuracy(load_accuracy_fixture(dir / "table3.json"));
        emit(ctx, accuracy_report_json(report), accuracy_report_text(report));
        return 0;
    }
    fail(ErrorCode::InvalidArgument, "unknown fixture '" + fixture + "' (paper/table1, paper/table2, paper/table3)");
}

int eval_synthetic(const Context& ctx, int k, int per_class, const std::vector<double>& noise_levels) {
    const auto lex = lexicon_of(ctx);
    ExperimentOptions options;
    options.headline = default_headline(lex);
    Json doc = Json::array();
    std::ostringstream text;
    for (double noise : noise_levels) {
        PopulationParams params;
        params.k = k;
        params.per_class_count = per_class;
        params.noise_level = noise;
        params.seed = ctx.seed;
        const auto pop = generate_population(params, lex, ctx.config.engine);
        const auto result = run_experiment(pop, lex, ctx.config.engine, options);
        Json entry{{"noise", noise},
                   {"seed", ctx.seed},
                   {"train", result.train_size},
                   {"test", result.test_size},
                   {"classification_accuracy", result.classification_accuracy},
                   {"ranks", rank_comparison_json(result.ranks)},
                   {"accuracy", accuracy_report_json(result.accuracy)}};
        doc.push_back(entry);
        text << std::defaultfloat << "noise " << noise << ": train " << result.train_size << ", test " << result.test_size
             << ", classification " << std::fixed << std::setprecision(1) << result.classification_accuracy << "%";
        if (!result.ranks.rows.empty())
            text << ", exact match " << std::setprecision(3) << exact_match_rate(result.ranks);
        text << '\n' << accuracy_report_text(result.accuracy);
    }
    emit(ctx, doc, text.str());
    return 0;
}

int cmd_synth(const Context& ctx, int k, int per_class, double noise, const std::string& out) {
    const auto lex = lexicon_of(ctx);
    PopulationParams params;
    params.k = k;
    params.per_class_count = per_class;
    params.noise_level = noise;
    params.seed = ctx.seed;
    const auto pop = generate_population(params, lex, ctx.config.engine);
    const auto responses = population_responses(pop);
    if (!out.empty()) {
        fs::create_directories(out);
        atomic_write(fs::path(out) / "responses.jsonl", responses_jsonl(responses));
        atomic_write(fs::path(out) / "variants.json", variant_catalog_json(pop.variants).dump(2));
        atomic_write(fs::path(out) / "population.json", population_json(pop).dump(2));
    }
    std::ostringstream text;
    text << pop.candidates.size() << " candidates, " << pop.variants.size() << " variants, " << responses.size()
         << " responses (k=" << k << ", noise=" << noise << ", seed=" << ctx.seed << ")\n";
    emit(ctx, population_json(pop), text.str());
    return 0;
}

httplib::Server* g_server = nullptr;

int cmd_serve(const Context& ctx, const std::string& host, int port) {
    const auto& cfg = ctx.config;
    std::shared_ptr<const Lexicon> lex;
    try {
        lex = std::make_shared<const Lexicon>(lexicon_of(ctx));
    } catch (const Error& e) {
        std::cerr << "warning: lexicon unavailable: " << e.what() << '\n';
    }
    ProfileStore store(cfg.store_path, cfg.engine);
    std::optional<ClusterModel> model;
    if (cfg.model_path) model = load_model(read_file(*cfg.model_path), cfg.engine);
    service::ElicitationService svc(cfg, lex, store, model);

    httplib::Server server;
    service::mount_routes(server, svc);
    g_server = &server;
    std::signal(SIGINT, [](int) {
        if (g_server) g_server->stop();
    });
    std::signal(SIGTERM, [](int) {
        if (g_server) g_server->stop();
    });
    std::cerr << "listening on " << host << ':' << port << " (store " << cfg.store_path.string() << ")\n";
    if (!server.listen(host, port)) {
        std::cerr << "error: cannot listen on " << host << ':' << port << '\n';
        return 1;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Emotion-aware personalization engine"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config_path, "Service/engine config JSON")->check(CLI::ExistingFile);
    app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"json", "text"}));
    app.add_option("--seed", g.seed, "Random seed for synthetic data");
    app.add_option("--fixtures", g.fixtures, "Fixture directory");
    app.add_option("--lexicon", g.lexicon, "Lexicon JSON (overrides config)");

    std::function<int(const Context&)> action;

    auto* lexicon_cmd = app.add_subcommand("lexicon", "Lexicon utilities");
    lexicon_cmd->require_subcommand(1);
    auto* validate = lexicon_cmd->add_subcommand("validate", "Validate a lexicon file");
    std::string lexicon_file;
    validate->add_option("file", lexicon_file)->required()->check(CLI::ExistingFile);
    validate->callback([&] { action = [&](const Context& c) { return cmd_lexicon_validate(c, lexicon_file); }; });

    auto* learn = app.add_subcommand("learn", "Cluster candidates from a responses file or store");
    std::string responses_file, store_dir, variants_file, model_out;
    int k = 0;
    auto* learn_src = learn->add_option("--responses", responses_file, "Responses JSON-lines");
    learn->add_option("--store", store_dir, "Store directory (excludes abandoned sessions)")->excludes(learn_src);
    learn->add_option("--variants", variants_file, "Variant catalog JSON (enables medoid profiles)");
    learn->add_option("-k,--k", k, "Number of classes (default from config)");
    learn->add_option("--out", model_out, "Write the model here");
    learn->callback([&] {
        if (responses_file.empty() && store_dir.empty()) throw CLI::RequiredError("--responses or --store");
        action = [&](const Context& c) { return cmd_learn(c, responses_file, store_dir, variants_file, k, model_out); };
    });

    auto* classify = app.add_subcommand("classify", "Classify candidates against a cluster model");
    std::string model_file, candidate;
    classify->add_option("--model", model_file)->required()->check(CLI::ExistingFile);
    classify->add_option("--responses", responses_file)->required()->check(CLI::ExistingFile);
    classify->add_option("--candidate", candidate, "Only this candidate");
    classify->callback([&] { action = [&](const Context& c) { return cmd_classify(c, model_file, responses_file, candidate); }; });

    auto* embed = app.add_subcommand("embed", "Embed emotions into a headline template");
    std::string template_file, target_text, kinds_text = "color,background";
    embed->add_option("--template", template_file)->required()->check(CLI::ExistingFile);
    embed->add_option("--target", target_text, "Comma-separated target weights")->required();
    embed->add_option("--kinds", kinds_text, "Feature kinds to select");
    embed->callback([&] { action = [&](const Context& c) { return cmd_embed(c, template_file, target_text, kinds_text); }; });

    auto* rank = app.add_subcommand("rank", "Rank items for a reader emotion vector");
    std::string reader_text, items_file;
    rank->add_option("--reader", reader_text, "Comma-separated reader weights")->required();
    rank->add_option("--items", items_file, "JSON array of {id, profile}")->required()->check(CLI::ExistingFile);
    rank->callback([&] { action = [&](const Context& c) { return cmd_rank(c, reader_text, items_file); }; });

    auto* eval = app.add_subcommand("eval", "Replay the published study fixtures or run the synthetic experiment");
    std::string fixture;
    bool synthetic = false;
    std::vector<double> noise_levels{0.0, 0.5, 1.0, 2.0};
    int per_class = 20;
    int eval_k = 5;
    auto* fixture_opt = eval->add_option("--fixture", fixture, "paper/table1 | paper/table2 | paper/table3");
    eval->add_flag("--synthetic", synthetic, "Run the synthetic end-to-end experiment")->excludes(fixture_opt);
    eval->add_option("--noise", noise_levels, "Noise levels for --synthetic");
    eval->add_option("--per-class", per_class, "Candidates per class for --synthetic");
    eval->add_option("-k,--k", eval_k, "Classes for --synthetic");
    eval->callback([&] {
        if (fixture.empty() && !synthetic) throw CLI::RequiredError("--fixture or --synthetic");
        action = [&](const Context& c) {
            return synthetic ? eval_synthetic(c, eval_k, per_class, noise_levels) : eval_fixture(c, fixture);
        };
    });

    auto* synth = app.add_subcommand("synth", "Generate a synthetic population");
    int synth_k = 5, synth_per_class = 20;
    double synth_noise = 0.0;
    std::string synth_out;
    synth->add_option("-k,--k", synth_k);
    synth->add_option("--per-class", synth_per_class);
    synth->add_option("--noise", synth_noise);
    synth->add_option("--out", synth_out, "Directory for responses.jsonl, variants.json, population.json");
    synth->callback([&] { action = [&](const Context& c) { return cmd_synth(c, synth_k, synth_per_class, synth_noise, synth_out); }; });

    auto* serve = app.add_subcommand("serve", "Run the HTTP elicitation service");
    std::string host = "127.0.0.1";
    int port = 8080;
    serve->add_option("--host", host);
    serve->add_option("--port", port);
    serve->callback([&] { action = [&](const Context& c) { return cmd_serve(c, host, port); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        return action(make_context(g));
    } catch (const Error& e) {
        std::cerr << "error: " << error_code_name(e.code()) << ": " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
