#pragma once

#include "fcov/classify.hpp"
#include "fcov/stats.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace fcov {

class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class CsvFault { unreadable, empty_file, ragged_row, non_numeric };

class csv_error : public io_error {
public:
    csv_error(CsvFault fault, std::string message, long row = -1, long column = -1)
        : io_error(std::move(message)), fault(fault), row(row), column(column)
    {
    }
    CsvFault fault;
    long row;    // 1-based, -1 when not applicable
    long column; // 1-based, -1 when not applicable
};

enum class CurveCsvFormat {
    plain,      // rows of values; uniform grid on [0,1] with weights 1/d
    header_grid // first row holds grid points; trapezoid weights
};

// One curve per row. Distinct failures: unreadable file, empty file,
// ragged row (reported with its index), non-numeric cell.
FunctionalSample ingest_curves(const std::filesystem::path& path, CurveCsvFormat format);

void write_curves_csv(const std::filesystem::path& path, const FunctionalSample& sample,
                      CurveCsvFormat format);

// Leading integer column names the group a curve belongs to; groups are
// returned in order of first appearance.
std::vector<FunctionalSample> ingest_grouped_curves(const std::filesystem::path& path,
                                                    CurveCsvFormat format);

// d x d kernel matrix; grid defaults to uniform when not supplied.
CovOperator ingest_operator(const std::filesystem::path& path);
CovOperator ingest_operator(const std::filesystem::path& path, const Grid& grid);
void write_operator_csv(const std::filesystem::path& path, const CovOperator& op);

// Self-describing classifier model blob (JSON with a version tag).
void save_classifier(const std::filesystem::path& path, const TrainedClassifier& c);
TrainedClassifier load_classifier(const std::filesystem::path& path);

std::string format_double(double v); // shortest round-trip formatting

} // namespace fcov
