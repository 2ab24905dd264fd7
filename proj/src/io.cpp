#include "fcov/io.hpp"

#include <json.hpp>

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace fcov {

namespace {

std::vector<std::string> split_row(const std::string& line)
{
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ','))
        cells.push_back(cell);
    if (!line.empty() && line.back() == ',')
        cells.emplace_back();
    return cells;
}

double parse_cell(const std::string& cell, long row, long col)
{
    const char* begin = cell.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(begin, &end);
    // the whole trimmed cell must be consumed
    while (end && *end != '\0' && (*end == ' ' || *end == '\t' || *end == '\r'))
        ++end;
    if (end == begin || (end && *end != '\0') || errno == ERANGE)
        throw csv_error(CsvFault::non_numeric,
                        "non-numeric cell '" + cell + "' at row " + std::to_string(row) +
                            ", column " + std::to_string(col),
                        row, col);
    return v;
}

std::vector<std::vector<double>> read_numeric_rows(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw csv_error(CsvFault::unreadable, "cannot open '" + path.string() + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        const std::vector<std::string> cells = split_row(line);
        std::vector<double> row;
        row.reserve(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c)
            row.push_back(parse_cell(cells[c], lineno, static_cast<long>(c + 1)));
        if (!rows.empty() && row.size() != rows.front().size())
            throw csv_error(CsvFault::ragged_row,
                            "ragged row " + std::to_string(lineno) + ": expected " +
                                std::to_string(rows.front().size()) + " cells, got " +
                                std::to_string(row.size()),
                            lineno);
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw csv_error(CsvFault::empty_file, "empty file '" + path.string() + "'");
    return rows;
}

Grid grid_for(std::size_t d, CurveCsvFormat format, const std::vector<double>* header)
{
    if (format == CurveCsvFormat::header_grid) {
        Eigen::VectorXd pts(static_cast<Eigen::Index>(d));
        for (std::size_t i = 0; i < d; ++i)
            pts[static_cast<Eigen::Index>(i)] = (*header)[i];
        return Grid::from_points_trapezoid(std::move(pts));
    }
    return Grid::uniform(static_cast<int>(d));
}

} // namespace

std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

FunctionalSample ingest_curves(const std::filesystem::path& path, CurveCsvFormat format)
{
    const auto rows = read_numeric_rows(path);
    std::size_t first = 0;
    const std::vector<double>* header = nullptr;
    if (format == CurveCsvFormat::header_grid) {
        if (rows.size() < 2)
            throw csv_error(CsvFault::empty_file, "no curve rows after the grid header in '" + path.string() + "'");
        header = &rows.front();
        first = 1;
    }
    const Grid grid = grid_for(rows.front().size(), format, header);
    std::vector<Curve> curves;
    for (std::size_t i = first; i < rows.size(); ++i) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(rows[i].size()));
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            v[static_cast<Eigen::Index>(j)] = rows[i][j];
        curves.emplace_back(grid, std::move(v));
    }
    return FunctionalSample(grid, std::move(curves));
}

void write_curves_csv(const std::filesystem::path& path, const FunctionalSample& sample,
                      CurveCsvFormat format)
{
    std::ofstream out(path);
    if (!out)
        throw io_error("cannot write '" + path.string() + "'");
    if (format == CurveCsvFormat::header_grid) {
        for (int j = 0; j < sample.dim(); ++j)
            out << (j ? "," : "") << format_double(sample.grid.points()[j]);
        out << "\n";
    }
    for (const Curve& f : sample.curves) {
        for (int j = 0; j < sample.dim(); ++j)
            out << (j ? "," : "") << format_double(f.values[j]);
        out << "\n";
    }
    if (!out)
        throw io_error("failed while writing '" + path.string() + "'");
}

std::vector<FunctionalSample> ingest_grouped_curves(const std::filesystem::path& path,
                                                    CurveCsvFormat format)
{
    const auto rows = read_numeric_rows(path);
    std::size_t first = 0;
    const std::vector<double>* header = nullptr;
    std::vector<double> header_cells;
    if (format == CurveCsvFormat::header_grid) {
        if (rows.size() < 2)
            throw csv_error(CsvFault::empty_file, "no curve rows after the grid header in '" + path.string() + "'");
        // header row has no group cell; it covers the value columns only
        header_cells = rows.front();
        header = &header_cells;
        first = 1;
    }
    const std::size_t width = rows[first].size();
    if (width < 2)
        throw csv_error(CsvFault::ragged_row, "grouped curve rows need a group column plus values");
    const std::size_t d = width - 1;
    if (header && header->size() != d)
        throw csv_error(CsvFault::ragged_row, "grid header length does not match value columns");
    const Grid grid = grid_for(d, format, header);

    std::vector<long> order;
    std::map<long, std::vector<Curve>> groups;
    for (std::size_t i = first; i < rows.size(); ++i) {
        if (rows[i].size() != width)
            throw csv_error(CsvFault::ragged_row, "ragged row " + std::to_string(i + 1), static_cast<long>(i + 1));
        const long gid = static_cast<long>(rows[i][0]);
        Eigen::VectorXd v(static_cast<Eigen::Index>(d));
        for (std::size_t j = 0; j < d; ++j)
            v[static_cast<Eigen::Index>(j)] = rows[i][j + 1];
        if (groups.find(gid) == groups.end())
            order.push_back(gid);
        groups[gid].emplace_back(grid, std::move(v));
    }

    std::vector<FunctionalSample> out;
    out.reserve(order.size());
    for (long gid : order)
        out.emplace_back(grid, std::move(groups[gid]), std::to_string(gid));
    return out;
}

CovOperator ingest_operator(const std::filesystem::path& path)
{
    const auto rows = read_numeric_rows(path);
    return ingest_operator(path, Grid::uniform(static_cast<int>(rows.size())));
}

CovOperator ingest_operator(const std::filesystem::path& path, const Grid& grid)
{
    const auto rows = read_numeric_rows(path);
    const std::size_t d = rows.size();
    if (rows.front().size() != d)
        throw csv_error(CsvFault::ragged_row, "operator matrix in '" + path.string() + "' is not square");
    Eigen::MatrixXd k(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return CovOperator(grid, std::move(k));
}

void write_operator_csv(const std::filesystem::path& path, const CovOperator& op)
{
    std::ofstream out(path);
    if (!out)
        throw io_error("cannot write '" + path.string() + "'");
    const Eigen::MatrixXd& k = op.kernel();
    for (Eigen::Index i = 0; i < k.rows(); ++i) {
        for (Eigen::Index j = 0; j < k.cols(); ++j)
            out << (j ? "," : "") << format_double(k(i, j));
        out << "\n";
    }
    if (!out)
        throw io_error("failed while writing '" + path.string() + "'");
}

namespace {

using nlohmann::json;

json grid_to_json(const Grid& g)
{
    json j;
    j["points"] = std::vector<double>(g.points().data(), g.points().data() + g.size());
    j["weights"] = std::vector<double>(g.weights().data(), g.weights().data() + g.size());
    return j;
}

Grid grid_from_json(const json& j)
{
    const auto pts = j.at("points").get<std::vector<double>>();
    const auto wts = j.at("weights").get<std::vector<double>>();
    return Grid(Eigen::Map<const Eigen::VectorXd>(pts.data(), static_cast<Eigen::Index>(pts.size())),
                Eigen::Map<const Eigen::VectorXd>(wts.data(), static_cast<Eigen::Index>(wts.size())));
}

json matrix_to_json(const Eigen::MatrixXd& m)
{
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j)
{
    const Eigen::Index r = static_cast<Eigen::Index>(j.size());
    const Eigen::Index c = r > 0 ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index l = 0; l < c; ++l)
            m(i, l) = j.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(l)).get<double>();
    return m;
}

} // namespace

void save_classifier(const std::filesystem::path& path, const TrainedClassifier& c)
{
    json j;
    j["format"] = "fcov-classifier";
    j["version"] = 1;
    j["mode"] = c.mode == ClassifierMode::curve ? "curve" : "operator";
    j["p_norm"] = std::isinf(c.p_norm) ? json("inf") : json(c.p_norm);
    j["tail"] = c.tail == TailKind::gaussian ? "gaussian" : "full";
    j["grid"] = grid_to_json(c.grid);
    j["priors"] = c.priors;
    json labels = json::array();
    for (const LabelSummary& s : c.labels) {
        json l;
        l["label"] = s.label;
        l["count"] = s.count;
        l["rademacher_norm"] = s.rademacher_norm;
        l["weak_variance"] = s.weak_variance;
        if (s.mean_curve)
            l["mean_curve"] = std::vector<double>(s.mean_curve->values.data(),
                                                  s.mean_curve->values.data() + s.mean_curve->values.size());
        if (s.mean_operator)
            l["mean_operator"] = matrix_to_json(s.mean_operator->kernel());
        labels.push_back(std::move(l));
    }
    j["labels"] = std::move(labels);

    std::ofstream out(path);
    if (!out)
        throw io_error("cannot write '" + path.string() + "'");
    out << j.dump(2) << "\n";
    if (!out)
        throw io_error("failed while writing '" + path.string() + "'");
}

TrainedClassifier load_classifier(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw io_error("cannot open '" + path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw io_error("malformed model file '" + path.string() + "': " + e.what());
    }
    if (j.value("format", "") != "fcov-classifier")
        throw io_error("'" + path.string() + "' is not a classifier model file");
    if (j.value("version", 0) != 1)
        throw io_error("unsupported model version in '" + path.string() + "'");

    TrainedClassifier c;
    c.mode = j.at("mode").get<std::string>() == "curve" ? ClassifierMode::curve : ClassifierMode::op;
    c.p_norm = j.at("p_norm").is_string() ? kInfNorm : j.at("p_norm").get<double>();
    c.tail = j.at("tail").get<std::string>() == "full" ? TailKind::full : TailKind::gaussian;
    c.grid = grid_from_json(j.at("grid"));
    c.priors = j.at("priors").get<std::vector<double>>();
    for (const json& l : j.at("labels")) {
        LabelSummary s;
        s.label = l.at("label").get<std::string>();
        s.count = l.at("count").get<int>();
        s.rademacher_norm = l.at("rademacher_norm").get<double>();
        s.weak_variance = l.at("weak_variance").get<double>();
        if (l.contains("mean_curve")) {
            const auto v = l.at("mean_curve").get<std::vector<double>>();
            s.mean_curve = Curve(c.grid, Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
        }
        if (l.contains("mean_operator"))
            s.mean_operator = CovOperator(c.grid, matrix_from_json(l.at("mean_operator")));
        c.labels.push_back(std::move(s));
    }
    return c;
}

} // namespace fcov
