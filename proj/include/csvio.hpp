#ifndef DWCONV_CSVIO_HPP
#define DWCONV_CSVIO_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace dw {

/// Minimal CSV emitter: '#' comment lines carrying the config echo and a
/// schema tag, one header row, numeric cells at full precision. Values that
/// have no finite representation (infinity rows, no-value markers) are
/// written as "inf" / "nan" tokens and parsed back as such.
class CsvWriter {
public:
    void comment(const std::string& text);
    void header(std::vector<std::string> columns);
    void row(const std::vector<std::string>& cells);
    void row_values(const std::vector<double>& cells);
    void write(std::ostream& out) const;
    void write_file(const std::string& path) const;

private:
    std::vector<std::string> comments_;
    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
};

struct CsvFile {
    std::vector<std::string> comments;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    double value(std::size_t row, const std::string& column) const;
};

CsvFile read_csv(std::istream& in);
CsvFile read_csv_file(const std::string& path);

} // namespace dw

#endif
