#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace lab {

// 17 significant digits, '.' decimal separator regardless of the global locale.
std::string format_double(double v);

// Comma-separated, header row, LF line endings.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);
    void row(const std::vector<double>& values);
    void row_mixed(const std::vector<std::string>& cells);

private:
    std::ofstream out_;
    std::size_t cols_;
};

void write_text(const std::string& path, const std::string& text);

} // namespace lab
