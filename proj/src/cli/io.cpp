#include "rsodc/cli/io.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace rsodc::cli {

namespace {

std::vector<std::string> split_fields(const std::string& line)
{
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string trim(std::string s)
{
    const auto first = s.find_first_not_of(" \t\r\"");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\"");
    return s.substr(first, last - first + 1);
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path, bool has_header)
{
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    CsvTable table;
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (first && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (first && has_header) {
            for (const auto& f : fields) table.header.push_back(trim(f));
            first = false;
            continue;
        }
        first = false;
        std::vector<double> row;
        for (std::size_t c = 0; c < fields.size(); ++c) {
            const std::string text = trim(fields[c]);
            std::size_t used = 0;
            double value = 0.0;
            try {
                value = std::stod(text, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (text.empty() || used != text.size())
                throw InputError(path.string() + ": row " + std::to_string(line_no) + ", column " +
                                 std::to_string(c + 1) + ": '" + text + "' is not a number");
            row.push_back(value);
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw InputError(path.string() + ": row " + std::to_string(line_no) + " has " + std::to_string(row.size()) +
                             " fields, expected " + std::to_string(rows.front().size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw InputError(path.string() + ": no data rows");
    if (!table.header.empty() && table.header.size() != rows.front().size())
        throw InputError(path.string() + ": header has " + std::to_string(table.header.size()) +
                         " names for " + std::to_string(rows.front().size()) + " columns");
    table.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t c = 0; c < rows[i].size(); ++c)
            table.values(static_cast<Index>(i), static_cast<Index>(c)) = rows[i][c];
    return table;
}

std::string format_double(double value)
{
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    std::array<char, 32> buf{};
    std::snprintf(buf.data(), buf.size(), "%.17g", value);
    return buf.data();
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    auto emit = [&](const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) out << (i ? "," : "") << fields[i];
        out << '\n';
    };
    if (!header.empty()) emit(header);
    for (const auto& row : rows) emit(row);
}

Json number_to_json(double value)
{
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    return value;
}

Json matrix_to_json(const Matrix& m)
{
    Json out = Json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Index c = 0; c < m.cols(); ++c) row.push_back(number_to_json(m(i, c)));
        out.push_back(std::move(row));
    }
    return out;
}

Matrix json_to_matrix(const Json& j)
{
    if (!j.is_array()) throw InputError("expected a nested array for a matrix");
    if (j.empty()) return Matrix(0, 0);
    const std::size_t cols = j.front().size();
    Matrix m(static_cast<Index>(j.size()), static_cast<Index>(cols));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_array() || j[i].size() != cols) throw InputError("ragged matrix in JSON input");
        for (std::size_t c = 0; c < cols; ++c) {
            if (!j[i][c].is_number()) throw InputError("non-numeric matrix entry in JSON input");
            m(static_cast<Index>(i), static_cast<Index>(c)) = j[i][c].get<double>();
        }
    }
    return m;
}

void write_json(const std::filesystem::path& path, const Json& payload)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << payload.dump(2) << '\n';
}

Json read_json(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

std::string svg_scatter(const Matrix& points, const std::vector<int>& labels, const std::string& title)
{
    static constexpr std::array<const char*, 10> palette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                                            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    constexpr double width = 480, height = 480, margin = 60;
    const Index n = points.rows();
    const bool one_d = points.cols() < 2;
    Vector xs = points.col(0);
    Vector ys(n);
    for (Index i = 0; i < n; ++i) ys(i) = one_d ? static_cast<double>(i + 1) : points(i, 1);

    auto span = [](const Vector& v, double& lo, double& hi) {
        lo = v.size() ? v.minCoeff() : 0.0;
        hi = v.size() ? v.maxCoeff() : 1.0;
        if (hi - lo < 1e-12) {
            lo -= 1.0;
            hi += 1.0;
        }
        const double pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;
    };
    double x_lo, x_hi, y_lo, y_hi;
    span(xs, x_lo, x_hi);
    span(ys, y_lo, y_hi);
    auto px = [&](double v) { return margin + (v - x_lo) / (x_hi - x_lo) * (width - 2 * margin); };
    auto py = [&](double v) { return height - margin - (v - y_lo) / (y_hi - y_lo) * (height - 2 * margin); };

    std::ostringstream svg;
    svg.setf(std::ios::fixed);
    svg.precision(2);
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << width / 2 << "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"15\">" << title << "</text>\n";
    svg << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << width - 2 * margin << "\" height=\""
        << height - 2 * margin << "\" fill=\"none\" stroke=\"#444\"/>\n";
    svg << "<text x=\"" << width / 2 << "\" y=\"" << height - 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">component 1</text>\n";
    svg << "<text x=\"18\" y=\"" << height / 2 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"13\" transform=\"rotate(-90 18 " << height / 2 << ")\">"
        << (one_d ? "subject" : "component 2") << "</text>\n";
    for (Index i = 0; i < n; ++i) {
        const int label = i < static_cast<Index>(labels.size()) ? labels[static_cast<std::size_t>(i)] : 1;
        const char* color = palette[static_cast<std::size_t>((label - 1 + 10) % 10)];
        svg << "<circle cx=\"" << px(xs(i)) << "\" cy=\"" << py(ys(i)) << "\" r=\"4\" fill=\"" << color
            << "\" fill-opacity=\"0.8\"/>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace rsodc::cli
