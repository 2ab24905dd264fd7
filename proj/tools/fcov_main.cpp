// Command line front end: simulate, ktest, permtest, power, classify,
// cluster, calibrate. Exit codes: 0 success, 1 validation error, 2 I/O.

#include <CLI11.hpp>
#include <json.hpp>

#include "fcov/classify.hpp"
#include "fcov/cluster.hpp"
#include "fcov/harness.hpp"
#include "fcov/io.hpp"
#include "fcov/simulate.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <fstream>
#include <functional>
#include <iostream>
#include <map>

namespace {

using nlohmann::json;

double parse_p_norm(const std::string& text)
{
    if (text == "inf" || text == "Inf" || text == "INF")
        return fcov::kInfNorm;
    const double p = std::stod(text);
    if (!(p >= 1.0))
        throw std::invalid_argument("p-norm must be >= 1 or 'inf'");
    return p;
}

std::string p_norm_string(double p)
{
    return std::isinf(p) ? "inf" : fcov::format_double(p);
}

fcov::CurveCsvFormat format_from(bool header)
{
    return header ? fcov::CurveCsvFormat::header_grid : fcov::CurveCsvFormat::plain;
}

void emit(const json& j, const std::string& out_path)
{
    const std::string text = j.dump(2);
    std::cout << text << "\n";
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out)
            throw fcov::io_error("cannot write '" + out_path + "'");
        out << text << "\n";
    }
}

// Groups of size one keep their raw tensor square; centering would zero them.
fcov::CovOperator group_operator(const fcov::FunctionalSample& group, bool center_override,
                                 bool has_override)
{
    const bool center = has_override ? center_override : group.size() >= 2;
    return fcov::group_covariance(group, center);
}

struct GroupPolicy {
    bool has_override = false;
    bool center = true;
};

fcov::OperatorSample groups_to_operators(const std::vector<fcov::FunctionalSample>& groups,
                                         const GroupPolicy& policy,
                                         std::optional<std::string> label = std::nullopt)
{
    std::vector<fcov::CovOperator> ops;
    std::vector<int> ranks;
    for (const fcov::FunctionalSample& g : groups) {
        ops.push_back(group_operator(g, policy.center, policy.has_override));
        ranks.push_back(g.size());
    }
    return fcov::OperatorSample(groups.front().grid, std::move(ops), std::move(ranks),
                                std::move(label));
}

std::vector<std::string> read_label_lines(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw fcov::io_error("cannot open labels file '" + path + "'");
    std::vector<std::string> labels;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (!line.empty())
            labels.push_back(line);
    }
    return labels;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"concentration-based inference for covariance operators of functional data"};
    app.require_subcommand(1);
    app.fallthrough(); // accept the global flags after the subcommand name

    std::uint64_t seed = 0;
    int threads = 0;
    std::string out_path;
    app.add_option("--seed", seed, "master RNG seed")->capture_default_str();
    app.add_option("--threads", threads, "worker threads (0 = library default)");
    app.add_option("--out", out_path, "output path (subcommand specific)");

    std::function<void()> action;

    // ---- simulate ----------------------------------------------------
    auto* sim = app.add_subcommand("simulate", "draw curves from a synthetic covariance operator");
    struct {
        int dim = 16;
        double decay = 4.0;
        double scale = 1.0;
        int n = 50;
        std::string process = "gauss";
        double nu = 4.0;
    } simopt;
    sim->add_option("--dim", simopt.dim, "grid size / operator dimension")->capture_default_str();
    sim->add_option("--decay", simopt.decay, "eigenvalue decay exponent")->capture_default_str();
    sim->add_option("--scale", simopt.scale, "spectrum scale")->capture_default_str();
    sim->add_option("--n", simopt.n, "number of curves")->capture_default_str();
    sim->add_option("--process", simopt.process, "gauss or t")->check(CLI::IsMember({"gauss", "t"}))->capture_default_str();
    sim->add_option("--nu", simopt.nu, "t-process degrees of freedom")->capture_default_str();
    sim->callback([&] {
        action = [&] {
            const fcov::Grid grid = fcov::Grid::uniform(simopt.dim);
            const fcov::DecaySpec spec{simopt.dim, simopt.decay, simopt.scale};
            const fcov::CovOperator sigma = fcov::random_covariance(spec, grid, fcov::split_seed(seed, 1));
            const fcov::FunctionalSample sample =
                simopt.process == "t" ? fcov::sample_t_process(sigma, simopt.nu, simopt.n, fcov::split_seed(seed, 2))
                                      : fcov::sample_gaussian(sigma, simopt.n, fcov::split_seed(seed, 2));
            const std::string prefix = out_path.empty() ? "sim" : out_path;
            const std::string curves_file = prefix + "_curves.csv";
            const std::string operator_file = prefix + "_operator.csv";
            fcov::write_curves_csv(curves_file, sample, fcov::CurveCsvFormat::plain);
            fcov::write_operator_csv(operator_file, sigma);
            json j;
            j["curves_file"] = curves_file;
            j["operator_file"] = operator_file;
            j["n"] = simopt.n;
            j["dim"] = simopt.dim;
            j["process"] = simopt.process;
            std::cout << j.dump(2) << "\n";
        };
    });

    // ---- ktest -------------------------------------------------------
    auto* kt = app.add_subcommand("ktest", "k-sample equality test for covariance operators");
    struct {
        std::vector<std::string> inputs;
        double alpha = 0.05;
        std::string p = "2";
        bool untuned = false;
        bool header = false;
        std::string rule = "gaussian";
        int draws = 1;
    } ktopt;
    kt->add_option("inputs", ktopt.inputs, "one curves CSV per sample")->required()->expected(-2);
    kt->add_option("--alpha", ktopt.alpha, "test size in (0, 1/2]")->capture_default_str();
    kt->add_option("--p-norm", ktopt.p, "Schatten norm: 1, 2 or inf")->capture_default_str();
    kt->add_flag("--untuned", ktopt.untuned, "disable the tuning coefficients");
    kt->add_flag("--header", ktopt.header, "first CSV row holds grid points");
    kt->add_option("--rule", ktopt.rule, "weak variance rule")->check(CLI::IsMember({"gaussian", "empirical"}))->capture_default_str();
    kt->add_option("--draws", ktopt.draws, "Rademacher draws to average")->capture_default_str();
    kt->callback([&] {
        action = [&] {
            std::vector<fcov::FunctionalSample> samples;
            for (const std::string& path : ktopt.inputs)
                samples.push_back(fcov::ingest_curves(path, format_from(ktopt.header)));
            fcov::KTestOptions options;
            options.rule = ktopt.rule == "empirical" ? fcov::WeakVarianceRule::empirical
                                                     : fcov::WeakVarianceRule::gaussian;
            options.n_draws = ktopt.draws;
            const fcov::KSampleResult r = fcov::k_sample_test(samples, parse_p_norm(ktopt.p),
                                                              ktopt.alpha, !ktopt.untuned, seed, options);
            json j;
            j["statistic"] = r.statistic;
            j["threshold"] = r.threshold;
            j["reject"] = r.reject;
            j["alpha"] = r.alpha;
            j["p_norm"] = p_norm_string(r.p_norm);
            j["per_sample_norms"] = r.per_sample_norms;
            j["elapsed_ms"] = r.elapsed_ms;
            j["alpha_star"] = r.alpha_star;
            emit(j, out_path);
        };
    });

    // ---- permtest ----------------------------------------------------
    auto* pt = app.add_subcommand("permtest", "two-sample permutation baseline");
    struct {
        std::string a, b;
        std::string p = "2";
        int perms = 100;
        bool header = false;
    } ptopt;
    pt->add_option("a", ptopt.a, "first curves CSV")->required();
    pt->add_option("b", ptopt.b, "second curves CSV")->required();
    pt->add_option("--p-norm", ptopt.p, "Schatten norm: 1, 2 or inf")->capture_default_str();
    pt->add_option("--perms", ptopt.perms, "number of label permutations")->capture_default_str();
    pt->add_flag("--header", ptopt.header, "first CSV row holds grid points");
    pt->callback([&] {
        action = [&] {
            const fcov::FunctionalSample a = fcov::ingest_curves(ptopt.a, format_from(ptopt.header));
            const fcov::FunctionalSample b = fcov::ingest_curves(ptopt.b, format_from(ptopt.header));
            const fcov::PermutationResult r =
                fcov::permutation_test_two_sample(a, b, parse_p_norm(ptopt.p), ptopt.perms, seed);
            json j;
            j["p_value"] = r.p_value;
            j["statistic"] = r.statistic;
            j["n_perms"] = ptopt.perms;
            j["elapsed_ms"] = r.elapsed_ms;
            emit(j, out_path);
        };
    });

    // ---- power -------------------------------------------------------
    auto* pw = app.add_subcommand("power", "power curve along the Procrustes interpolation path");
    struct {
        std::vector<double> gammas = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
        int n = 50;
        int reps = 1000;
        std::string method = "concentration";
        double decay = 4.0;
        int dim = 16;
        double alpha = 0.05;
        std::string p = "2";
        bool untuned = false;
    } pwopt;
    pw->add_option("--gammas", pwopt.gammas, "interpolation parameters")->capture_default_str();
    pw->add_option("--n", pwopt.n, "curves per sample")->capture_default_str();
    pw->add_option("--reps", pwopt.reps, "replications per gamma")->capture_default_str();
    pw->add_option("--method", pwopt.method, "concentration or permutation")
        ->check(CLI::IsMember({"concentration", "permutation"}))->capture_default_str();
    pw->add_option("--decay", pwopt.decay, "eigenvalue decay exponent")->capture_default_str();
    pw->add_option("--dim", pwopt.dim, "grid size")->capture_default_str();
    pw->add_option("--alpha", pwopt.alpha, "test size")->capture_default_str();
    pw->add_option("--p-norm", pwopt.p, "Schatten norm: 1, 2 or inf")->capture_default_str();
    pw->add_flag("--untuned", pwopt.untuned, "disable the tuning coefficients");
    pw->callback([&] {
        action = [&] {
            fcov::ExperimentConfig config;
            config.id = "power";
            config.seed = seed;
            config.dim = pwopt.dim;
            config.decay = pwopt.decay;
            config.sample_sizes = {pwopt.n};
            config.replications = pwopt.reps;
            config.p_norm = parse_p_norm(pwopt.p);
            config.alphas = {pwopt.alpha};
            config.gammas = pwopt.gammas;
            config.method = pwopt.method == "permutation" ? fcov::TestMethod::permutation
                                                          : fcov::TestMethod::concentration;
            config.tuned = !pwopt.untuned;
            if (!out_path.empty())
                config.out_dir = out_path;
            const std::vector<fcov::ResultRecord> records = fcov::run_experiment(config);
            std::cout << "gamma,power,mean_elapsed_ms\n";
            for (const fcov::ResultRecord& rec : records)
                std::cout << rec.params.at("gamma") << "," << fcov::format_double(rec.value) << ","
                          << fcov::format_double(rec.elapsed_ms) << "\n";
        };
    });

    // ---- calibrate ---------------------------------------------------
    auto* cal = app.add_subcommand("calibrate", "empirical size of the k-sample test under H0");
    struct {
        int k = 4;
        std::vector<int> ns = {50};
        std::vector<double> alphas = {0.05};
        int reps = 1000;
        int dim = 16;
        double decay = 4.0;
        std::string p = "2";
        bool untuned = false;
    } calopt;
    cal->add_option("--k", calopt.k, "number of samples")->capture_default_str();
    cal->add_option("--n", calopt.ns, "sample sizes")->capture_default_str();
    cal->add_option("--alpha", calopt.alphas, "target sizes")->capture_default_str();
    cal->add_option("--reps", calopt.reps, "replications")->capture_default_str();
    cal->add_option("--dim", calopt.dim, "grid size")->capture_default_str();
    cal->add_option("--decay", calopt.decay, "eigenvalue decay exponent")->capture_default_str();
    cal->add_option("--p-norm", calopt.p, "Schatten norm: 1, 2 or inf")->capture_default_str();
    cal->add_flag("--untuned", calopt.untuned, "disable the tuning coefficients");
    cal->callback([&] {
        action = [&] {
            fcov::ExperimentConfig config;
            config.id = "calibrate";
            config.seed = seed;
            config.dim = calopt.dim;
            config.decay = calopt.decay;
            config.k = calopt.k;
            config.sample_sizes = calopt.ns;
            config.replications = calopt.reps;
            config.p_norm = parse_p_norm(calopt.p);
            config.alphas = calopt.alphas;
            config.tuned = !calopt.untuned;
            if (!out_path.empty())
                config.out_dir = out_path;
            const std::vector<fcov::ResultRecord> records = fcov::run_experiment(config);
            for (const fcov::ResultRecord& rec : records) {
                json j;
                j["experiment"] = rec.experiment_id;
                j["params"] = rec.params;
                j["metric"] = rec.metric;
                j["value"] = rec.value;
                j["se"] = rec.se;
                j["seed"] = rec.seed;
                std::cout << j.dump() << "\n";
            }
        };
    });

    // ---- classify ----------------------------------------------------
    auto* cls = app.add_subcommand("classify", "concentration-based approximate Bayes classifier");
    cls->require_subcommand(1);

    auto* train_cmd = cls->add_subcommand("train", "train from labeled CSVs");
    struct {
        std::vector<std::string> inputs; // label=path
        std::string mode = "curve";
        std::string p = "1";
        std::string tail = "gauss";
        bool header = false;
        bool center = false;
        bool no_center = false;
    } tropt;
    train_cmd->add_option("inputs", tropt.inputs, "label=path pairs, one CSV per label")->required()->expected(-2);
    train_cmd->add_option("--mode", tropt.mode, "curve or operator")->check(CLI::IsMember({"curve", "operator"}))->capture_default_str();
    train_cmd->add_option("--p-norm", tropt.p, "Schatten norm: 1, 2 or inf")->capture_default_str();
    train_cmd->add_option("--tail", tropt.tail, "gauss or full")->check(CLI::IsMember({"gauss", "full"}))->capture_default_str();
    train_cmd->add_flag("--header", tropt.header, "first CSV row holds grid points");
    train_cmd->add_flag("--center-groups", tropt.center, "always center group covariances");
    train_cmd->add_flag("--no-center-groups", tropt.no_center, "never center group covariances");
    train_cmd->callback([&] {
        action = [&] {
            if (out_path.empty())
                throw std::invalid_argument("classify train: --out <model file> is required");
            fcov::TrainOptions options;
            options.tail = tropt.tail == "full" ? fcov::TailKind::full : fcov::TailKind::gaussian;

            std::vector<std::pair<std::string, std::string>> pairs;
            for (const std::string& item : tropt.inputs) {
                const auto eq = item.find('=');
                if (eq == std::string::npos || eq == 0 || eq + 1 == item.size())
                    throw std::invalid_argument("classify train: inputs must be label=path, got '" + item + "'");
                pairs.emplace_back(item.substr(0, eq), item.substr(eq + 1));
            }

            fcov::TrainedClassifier model;
            const double p = parse_p_norm(tropt.p);
            if (tropt.mode == "curve") {
                std::vector<fcov::FunctionalSample> data;
                for (const auto& [label, path] : pairs) {
                    fcov::FunctionalSample s = fcov::ingest_curves(path, format_from(tropt.header));
                    s.label = label;
                    data.push_back(std::move(s));
                }
                model = fcov::train(data, p, seed, options);
            } else {
                GroupPolicy policy;
                if (tropt.center || tropt.no_center) {
                    policy.has_override = true;
                    policy.center = tropt.center;
                }
                std::vector<fcov::OperatorSample> data;
                for (const auto& [label, path] : pairs) {
                    const auto groups = fcov::ingest_grouped_curves(path, format_from(tropt.header));
                    data.push_back(groups_to_operators(groups, policy, label));
                }
                model = fcov::train(data, p, seed, options);
            }
            fcov::save_classifier(out_path, model);
            json j;
            j["model_file"] = out_path;
            j["labels"] = json::array();
            for (const fcov::LabelSummary& s : model.labels)
                j["labels"].push_back({{"label", s.label},
                                       {"count", s.count},
                                       {"rademacher_norm", s.rademacher_norm},
                                       {"weak_variance", s.weak_variance}});
            std::cout << j.dump(2) << "\n";
        };
    });

    auto* pred_cmd = cls->add_subcommand("predict", "classify curves or groups with a trained model");
    struct {
        std::string model;
        std::string input;
        bool header = false;
        bool center = false;
        bool no_center = false;
    } propt;
    pred_cmd->add_option("--model", propt.model, "model file from classify train")->required();
    pred_cmd->add_option("input", propt.input, "curves CSV (grouped when the model is operator mode)")->required();
    pred_cmd->add_flag("--header", propt.header, "first CSV row holds grid points");
    pred_cmd->add_flag("--center-groups", propt.center, "always center group covariances");
    pred_cmd->add_flag("--no-center-groups", propt.no_center, "never center group covariances");
    pred_cmd->callback([&] {
        action = [&] {
            const fcov::TrainedClassifier model = fcov::load_classifier(propt.model);
            std::ostringstream csv;
            csv << "id,label";
            for (const fcov::LabelSummary& s : model.labels)
                csv << ",p_" << s.label;
            csv << "\n";
            const auto append = [&](const std::string& id, const fcov::Classification& c) {
                csv << id << "," << c.label;
                for (Eigen::Index j = 0; j < c.probabilities.size(); ++j)
                    csv << "," << fcov::format_double(c.probabilities[j]);
                csv << "\n";
            };
            if (model.mode == fcov::ClassifierMode::curve) {
                const fcov::FunctionalSample sample = fcov::ingest_curves(propt.input, format_from(propt.header));
                for (int i = 0; i < sample.size(); ++i)
                    append(std::to_string(i),
                           fcov::classify(model, sample.curves[static_cast<std::size_t>(i)]));
            } else {
                GroupPolicy policy;
                if (propt.center || propt.no_center) {
                    policy.has_override = true;
                    policy.center = propt.center;
                }
                const auto groups = fcov::ingest_grouped_curves(propt.input, format_from(propt.header));
                for (const fcov::FunctionalSample& g : groups)
                    append(*g.label, fcov::classify(model, group_operator(g, policy.center, policy.has_override)));
            }
            std::cout << csv.str();
            if (!out_path.empty()) {
                std::ofstream out(out_path);
                if (!out)
                    throw fcov::io_error("cannot write '" + out_path + "'");
                out << csv.str();
            }
        };
    });

    // ---- cluster -------------------------------------------------------
    auto* clu = app.add_subcommand("cluster", "EM-style soft clustering of covariance operators");
    struct {
        std::string input;
        int k = 3;
        int max_iter = 20;
        double tol = 1e-6;
        std::string p = "1";
        bool header = false;
        bool center = false;
        bool no_center = false;
        std::string labels_path;
        std::string confusion_path = "confusion.csv";
    } cluopt;
    clu->add_option("input", cluopt.input, "grouped curves CSV or directory of operator CSVs")->required();
    clu->add_option("--k", cluopt.k, "number of clusters")->capture_default_str();
    clu->add_option("--max-iter", cluopt.max_iter, "iteration cap")->capture_default_str();
    clu->add_option("--tol", cluopt.tol, "responsibility convergence tolerance")->capture_default_str();
    clu->add_option("--p-norm", cluopt.p, "Schatten norm: 1, 2 or inf")->capture_default_str();
    clu->add_flag("--header", cluopt.header, "first CSV row holds grid points");
    clu->add_flag("--center-groups", cluopt.center, "always center group covariances");
    clu->add_flag("--no-center-groups", cluopt.no_center, "never center group covariances");
    clu->add_option("--labels", cluopt.labels_path, "true labels, one per data point");
    clu->add_option("--confusion", cluopt.confusion_path, "confusion matrix CSV path")->capture_default_str();
    clu->callback([&] {
        action = [&] {
            std::optional<fcov::OperatorSample> data;
            if (std::filesystem::is_directory(cluopt.input)) {
                std::vector<std::filesystem::path> files;
                for (const auto& entry : std::filesystem::directory_iterator(cluopt.input))
                    if (entry.is_regular_file() && entry.path().extension() == ".csv")
                        files.push_back(entry.path());
                std::sort(files.begin(), files.end());
                if (files.empty())
                    throw fcov::io_error("no operator CSVs in '" + cluopt.input + "'");
                std::vector<fcov::CovOperator> ops;
                std::vector<int> ranks;
                std::optional<fcov::Grid> grid;
                for (const auto& f : files) {
                    fcov::CovOperator op = grid ? fcov::ingest_operator(f, *grid) : fcov::ingest_operator(f);
                    if (!grid)
                        grid = op.grid();
                    ops.push_back(std::move(op));
                    ranks.push_back(1); // rank metadata unknown for bare matrices
                }
                data.emplace(*grid, std::move(ops), std::move(ranks));
            } else {
                GroupPolicy policy;
                if (cluopt.center || cluopt.no_center) {
                    policy.has_override = true;
                    policy.center = cluopt.center;
                }
                const auto groups = fcov::ingest_grouped_curves(cluopt.input, format_from(cluopt.header));
                data = groups_to_operators(groups, policy);
            }

            const fcov::ClusteringResult result = fcov::run_clustering(
                *data, cluopt.k, cluopt.max_iter, cluopt.tol, parse_p_norm(cluopt.p), seed);

            json j;
            j["assignments"] = result.assignments;
            j["tau"] = std::vector<double>(result.state.tau.data(),
                                           result.state.tau.data() + result.state.tau.size());
            j["iterations"] = result.state.iteration;
            j["converged"] = result.converged;
            emit(j, out_path);

            if (!cluopt.labels_path.empty()) {
                const std::vector<std::string> truth = read_label_lines(cluopt.labels_path);
                if (truth.size() != result.assignments.size())
                    throw std::invalid_argument("cluster: label count does not match data size");
                std::vector<std::string> order;
                std::map<std::string, std::vector<int>> confusion;
                for (std::size_t i = 0; i < truth.size(); ++i) {
                    if (confusion.find(truth[i]) == confusion.end()) {
                        order.push_back(truth[i]);
                        confusion[truth[i]].assign(static_cast<std::size_t>(cluopt.k), 0);
                    }
                    confusion[truth[i]][static_cast<std::size_t>(result.assignments[i])] += 1;
                }
                std::ofstream out(cluopt.confusion_path);
                if (!out)
                    throw fcov::io_error("cannot write '" + cluopt.confusion_path + "'");
                out << "label";
                for (int c = 0; c < cluopt.k; ++c)
                    out << ",cluster_" << c;
                out << "\n";
                for (const std::string& label : order) {
                    out << label;
                    for (int c = 0; c < cluopt.k; ++c)
                        out << "," << confusion[label][static_cast<std::size_t>(c)];
                    out << "\n";
                }
            }
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

#ifdef _OPENMP
    if (threads > 0)
        omp_set_num_threads(threads);
#endif

    try {
        action();
    } catch (const fcov::csv_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        // malformed content is a validation failure; an unreadable file is I/O
        return e.fault == fcov::CsvFault::unreadable ? 2 : 1;
    } catch (const fcov::io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
