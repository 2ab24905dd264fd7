#include "fcov/harness.hpp"

#include "fcov/io.hpp"
#include "fcov/simulate.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>

namespace fcov {

void ExperimentConfig::validate() const
{
    if (id != "calibrate" && id != "power")
        throw std::invalid_argument("ExperimentConfig: unknown experiment '" + id + "'");
    if (replications < 1)
        throw std::invalid_argument("ExperimentConfig: replications must be >= 1");
    if (dim < 2)
        throw std::invalid_argument("ExperimentConfig: dim must be >= 2");
    if (sample_sizes.empty())
        throw std::invalid_argument("ExperimentConfig: need at least one sample size");
    for (int n : sample_sizes)
        if (n < 2)
            throw std::invalid_argument("ExperimentConfig: sample sizes must be >= 2");
    if (alphas.empty())
        throw std::invalid_argument("ExperimentConfig: need at least one alpha");
    if (id == "power" && gammas.empty())
        throw std::invalid_argument("ExperimentConfig: power experiment needs gammas");
    if (id == "calibrate" && k < 2)
        throw std::invalid_argument("ExperimentConfig: calibrate needs k >= 2");
}

SizeEstimate empirical_size_h0(const CovOperator& sigma, int k, int n, double alpha,
                               double p_norm, int reps, bool tuned, std::uint64_t seed)
{
    std::vector<char> rejected(static_cast<std::size_t>(reps), 0);
#pragma omp parallel for schedule(dynamic)
    for (int rep = 0; rep < reps; ++rep) {
        const std::uint64_t rep_seed = split_seed(seed, static_cast<std::uint64_t>(rep));
        std::vector<FunctionalSample> samples;
        samples.reserve(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i)
            samples.push_back(sample_gaussian(sigma, n, split_seed(rep_seed, static_cast<std::uint64_t>(i))));
        const KSampleResult r = k_sample_test(samples, p_norm, alpha, tuned,
                                              split_seed(rep_seed, static_cast<std::uint64_t>(k)));
        rejected[static_cast<std::size_t>(rep)] = r.reject ? 1 : 0;
    }
    int hits = 0;
    for (char c : rejected)
        hits += c;
    SizeEstimate est;
    est.n = n;
    est.alpha = alpha;
    est.size = static_cast<double>(hits) / reps;
    est.se = std::sqrt(est.size * (1.0 - est.size) / reps);
    return est;
}

namespace {

std::string fmt_num(double v)
{
    return format_double(v);
}

void write_plot_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                    const std::vector<std::vector<double>>& rows)
{
    std::ofstream out(path);
    if (!out)
        throw io_error("cannot write '" + path.string() + "'");
    for (std::size_t j = 0; j < header.size(); ++j)
        out << (j ? "," : "") << header[j];
    out << "\n";
    for (const auto& row : rows) {
        for (std::size_t j = 0; j < row.size(); ++j)
            out << (j ? "," : "") << fmt_num(row[j]);
        out << "\n";
    }
    if (!out)
        throw io_error("failed while writing '" + path.string() + "'");
}

} // namespace

std::vector<ResultRecord> run_experiment(const ExperimentConfig& config)
{
    config.validate();
    const Grid grid = Grid::uniform(config.dim);
    const DecaySpec spec{config.dim, config.decay, 1.0};

    std::vector<ResultRecord> records;
    std::vector<std::vector<double>> plot_rows;
    std::vector<std::string> plot_header;

    const auto base_params = [&](std::map<std::string, std::string> extra) {
        std::map<std::string, std::string> p = {
            {"dim", std::to_string(config.dim)},
            {"decay", fmt_num(config.decay)},
            {"p_norm", std::isinf(config.p_norm) ? "inf" : fmt_num(config.p_norm)},
            {"replications", std::to_string(config.replications)},
            {"tuned", config.tuned ? "true" : "false"},
        };
        p.insert(extra.begin(), extra.end());
        return p;
    };

    if (config.id == "calibrate") {
        const CovOperator sigma = random_covariance(spec, grid, split_seed(config.seed, 0xA0));
        plot_header = {"n", "alpha", "size", "se"};
        for (std::size_t ni = 0; ni < config.sample_sizes.size(); ++ni) {
            for (std::size_t ai = 0; ai < config.alphas.size(); ++ai) {
                const int n = config.sample_sizes[ni];
                const double alpha = config.alphas[ai];
                const SizeEstimate est = empirical_size_h0(
                    sigma, config.k, n, alpha, config.p_norm, config.replications, config.tuned,
                    split_seed(config.seed, ni + 1, ai));
                ResultRecord rec;
                rec.experiment_id = config.id;
                rec.params = base_params({{"k", std::to_string(config.k)},
                                          {"n", std::to_string(n)},
                                          {"alpha", fmt_num(alpha)}});
                rec.metric = "empirical_size";
                rec.value = est.size;
                rec.se = est.se;
                rec.seed = config.seed;
                records.push_back(std::move(rec));
                plot_rows.push_back({static_cast<double>(n), alpha, est.size, est.se});
            }
        }
    } else { // power
        const CovOperator sigma1 = random_covariance(spec, grid, split_seed(config.seed, 0xA1));
        const CovOperator sigma2 = random_covariance(spec, grid, split_seed(config.seed, 0xA2));
        PowerOptions options;
        options.tuned = config.tuned;
        const int n = config.sample_sizes.front();
        const double alpha = config.alphas.front();
        const std::vector<PowerPoint> points =
            power_curve(sigma1, sigma2, config.gammas, n, alpha, config.p_norm,
                        config.replications, config.method, split_seed(config.seed, 0xA3), options);
        plot_header = {"gamma", "power", "mean_elapsed_ms"};
        for (const PowerPoint& pt : points) {
            ResultRecord rec;
            rec.experiment_id = config.id;
            rec.params = base_params({{"n", std::to_string(n)},
                                      {"alpha", fmt_num(alpha)},
                                      {"gamma", fmt_num(pt.gamma)},
                                      {"method", config.method == TestMethod::concentration
                                                     ? "concentration"
                                                     : "permutation"}});
            rec.metric = "power";
            rec.value = pt.power;
            rec.se = std::sqrt(pt.power * (1.0 - pt.power) / config.replications);
            rec.elapsed_ms = pt.mean_elapsed_ms;
            rec.seed = config.seed;
            records.push_back(std::move(rec));
            plot_rows.push_back({pt.gamma, pt.power, 0.0}); // timing zeroed: files stay byte-identical
        }
    }

    if (!config.out_dir.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(config.out_dir, ec);
        if (ec)
            throw io_error("cannot create output directory '" + config.out_dir.string() + "'");
        write_records(config.out_dir / "records.jsonl", records, /*zero_elapsed=*/true);
        write_plot_csv(config.out_dir / (config.id + ".csv"), plot_header, plot_rows);
    }
    return records;
}

void write_records(const std::filesystem::path& path, const std::vector<ResultRecord>& records,
                   bool zero_elapsed)
{
    std::ofstream out(path);
    if (!out)
        throw io_error("cannot write '" + path.string() + "'");
    for (const ResultRecord& rec : records) {
        nlohmann::json j;
        j["experiment"] = rec.experiment_id;
        j["params"] = rec.params;
        j["metric"] = rec.metric;
        j["value"] = rec.value;
        j["se"] = rec.se;
        j["elapsed_ms"] = zero_elapsed ? 0.0 : rec.elapsed_ms;
        j["seed"] = rec.seed;
        out << j.dump() << "\n";
    }
    if (!out)
        throw io_error("failed while writing '" + path.string() + "'");
}

std::vector<ResultRecord> read_records(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw io_error("cannot open '" + path.string() + "'");
    std::vector<ResultRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw io_error("malformed record in '" + path.string() + "': " + e.what());
        }
        ResultRecord rec;
        rec.experiment_id = j.at("experiment").get<std::string>();
        rec.params = j.at("params").get<std::map<std::string, std::string>>();
        rec.metric = j.at("metric").get<std::string>();
        rec.value = j.at("value").get<double>();
        rec.se = j.at("se").get<double>();
        rec.elapsed_ms = j.at("elapsed_ms").get<double>();
        rec.seed = j.at("seed").get<std::uint64_t>();
        records.push_back(std::move(rec));
    }
    return records;
}

} // namespace fcov
