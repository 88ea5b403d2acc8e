#include "fusionclust/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace fusionclust {
namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line)
{
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

bool is_missing(const std::string& f)
{
    return f.empty() || f == "NaN" || f == "nan" || f == "NA";
}

std::optional<double> parse_number(const std::string& f)
{
    double v = 0.0;
    const char* first = f.data();
    const char* last = f.data() + f.size();
    if (!f.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) return std::nullopt;
    return v;
}

bool looks_like_header(const std::vector<std::string>& fields)
{
    for (const auto& f : fields) {
        if (!is_missing(f) && !parse_number(f)) return true;
    }
    return false;
}

} // namespace

LabeledDataset read_dataset_csv(std::istream& in)
{
    std::vector<std::vector<std::string>> rows;
    bool has_label = false;
    bool header_seen = false;
    std::size_t width = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        auto fields = split_fields(t);
        if (!header_seen && rows.empty() && looks_like_header(fields)) {
            header_seen = true;
            has_label = fields.back() == "label";
            width = fields.size();
            continue;
        }
        if (width == 0) width = fields.size();
        if (fields.size() != width) {
            throw std::runtime_error("csv line " + std::to_string(lineno) + ": expected " +
                                     std::to_string(width) + " fields, got " +
                                     std::to_string(fields.size()));
        }
        rows.push_back(std::move(fields));
    }
    if (rows.empty()) {
        throw std::runtime_error("csv contains no data rows");
    }
    const std::size_t P = has_label ? width - 1 : width;
    if (P == 0) {
        throw std::runtime_error("csv has no feature columns");
    }

    const auto N = static_cast<Eigen::Index>(rows.size());
    Matrix values = Matrix::Zero(static_cast<Eigen::Index>(P), N);
    MaskMatrix mask = MaskMatrix::Constant(static_cast<Eigen::Index>(P), N, false);
    std::vector<int> labels;
    for (Eigen::Index i = 0; i < N; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i)];
        for (std::size_t p = 0; p < P; ++p) {
            if (is_missing(r[p])) continue;
            const auto v = parse_number(r[p]);
            if (!v || !std::isfinite(*v)) {
                throw std::runtime_error("csv row " + std::to_string(i + 1) + ": bad value '" + r[p] + "'");
            }
            values(static_cast<Eigen::Index>(p), i) = *v;
            mask(static_cast<Eigen::Index>(p), i) = true;
        }
        if (has_label) {
            const auto v = parse_number(r[P]);
            if (!v || *v != std::floor(*v)) {
                throw std::runtime_error("csv row " + std::to_string(i + 1) + ": bad label '" + r[P] + "'");
            }
            labels.push_back(static_cast<int>(*v));
        }
    }

    LabeledDataset out{ObservedDataset(std::move(values), std::move(mask)), std::nullopt};
    if (has_label) out.truth = Partition::canonical(labels);
    return out;
}

LabeledDataset read_dataset_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    return read_dataset_csv(in);
}

std::string format_double(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) return "nan";
    return std::string(buf, ptr);
}

void write_dataset_csv(std::ostream& out, const ObservedDataset& data,
                       const std::optional<Partition>& truth,
                       const std::vector<std::string>& comments)
{
    for (const auto& c : comments) out << "# " << c << '\n';
    const Eigen::Index P = data.features();
    for (Eigen::Index p = 0; p < P; ++p) {
        out << (p ? "," : "") << 'f' << (p + 1);
    }
    if (truth) out << ",label";
    out << '\n';
    for (Eigen::Index i = 0; i < data.points(); ++i) {
        for (Eigen::Index p = 0; p < P; ++p) {
            if (p) out << ',';
            if (data.observed(p, i)) out << format_double(data.values()(p, i));
        }
        if (truth) out << ',' << (*truth)[static_cast<std::size_t>(i)];
        out << '\n';
    }
}

} // namespace fusionclust
