#include "sectoral/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "sectoral/errors.hpp"

#ifndef SECTORAL_DATA_DIR
#define SECTORAL_DATA_DIR "data"
#endif

namespace sectoral {

namespace {

using json = nlohmann::ordered_json;

std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// RFC 4180 splitting of a single physical line.
std::vector<std::string> split_csv_line(const std::string& line, const std::string& source, std::size_t row)
{
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (std::size_t k = 0; k < line.size(); ++k) {
        const char c = line[k];
        if (quoted) {
            if (c == '"') {
                if (k + 1 < line.size() && line[k + 1] == '"') {
                    cur += '"';
                    ++k;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    if (quoted)
        throw ParseError(source + ": unterminated quote at row " + std::to_string(row), row, 0);
    cells.push_back(std::move(cur));
    return cells;
}

std::string csv_escape(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::optional<int> parse_year_header(std::string_view h)
{
    h = trim(h);
    if (h.size() < 4)
        return std::nullopt;
    int year = 0;
    const auto [ptr, ec] = std::from_chars(h.data(), h.data() + 4, year);
    if (ec != std::errc{} || ptr != h.data() + 4)
        return std::nullopt;
    const std::string_view rest = trim(h.substr(4));
    if (!rest.empty() && rest.front() != '[')
        return std::nullopt;
    return year;
}

bool is_missing(std::string_view cell)
{
    cell = trim(cell);
    return cell.empty() || cell == "..";
}

// Strict decimal parse of the whole cell; no locale, no non-finite values.
std::optional<double> parse_strict(std::string_view cell)
{
    cell = trim(cell);
    if (cell.empty())
        return std::nullopt;
    double v = 0.0;
    const char* first = cell.data();
    if (*first == '+')
        ++first;
    const auto [ptr, ec] = std::from_chars(first, cell.data() + cell.size(), v);
    if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v))
        return std::nullopt;
    return v;
}

double parse_cell(const std::string& cell, const std::string& source, std::size_t row, std::size_t col)
{
    const auto v = parse_strict(cell);
    if (!v)
        throw ParseError(source + ": malformed number '" + cell + "' at row " + std::to_string(row) + ", column " +
                             std::to_string(col),
                         row, col);
    return *v;
}

struct TableBuilder {
    IndicatorTable table;
    std::map<std::pair<std::string, std::string>, std::size_t> index;
    std::set<int> years;

    IndicatorRow& row_for(const std::string& country, const std::string& name, const std::string& series)
    {
        const auto key = std::make_pair(country, series);
        auto it = index.find(key);
        if (it == index.end()) {
            it = index.emplace(key, table.rows.size()).first;
            table.rows.push_back({country, name, series, {}});
        }
        IndicatorRow& row = table.rows[it->second];
        if (row.country_name.empty())
            row.country_name = name;
        return row;
    }

    static void put(IndicatorRow& row, int year, std::optional<double> v)
    {
        auto [it, inserted] = row.values.emplace(year, v);
        if (!inserted && v)
            it->second = v;
    }

    IndicatorTable finish()
    {
        table.years.assign(years.begin(), years.end());
        for (auto& row : table.rows)
            for (int y : table.years)
                row.values.emplace(y, std::nullopt);
        return std::move(table);
    }
};

IndicatorTable parse_wide(std::istream& in, const std::vector<std::string>& header, const ParseOptions& opt,
                          const std::string& source)
{
    TableBuilder b;
    std::vector<std::pair<std::size_t, int>> year_cols;
    for (std::size_t c = 4; c < header.size(); ++c) {
        if (trim(header[c]).empty())
            continue;
        const auto year = parse_year_header(header[c]);
        if (!year)
            throw ParseError(source + ": malformed header column '" + header[c] + "'", 1, c + 1);
        if (*year >= opt.first_year && *year <= opt.last_year) {
            year_cols.emplace_back(c, *year);
            b.years.insert(*year);
        }
    }

    std::string line;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty())
            continue;
        const auto cells = split_csv_line(line, source, row);
        const std::string code(cells.size() > 1 ? trim(cells[1]) : std::string_view{});
        const std::string series(cells.size() > 3 ? trim(cells[3]) : std::string_view{});
        // DataBank exports end with blank rows and a "Data from database" footer.
        if (code.empty() && series.empty())
            continue;
        if (cells.size() < 4)
            throw ParseError(source + ": row " + std::to_string(row) + " has fewer than four columns", row, 0);
        if (!opt.series_codes.contains(series)) {
            ++b.table.skipped_series[series];
            continue;
        }
        IndicatorRow& r = b.row_for(code, std::string(trim(cells[0])), series);
        for (const auto& [c, year] : year_cols) {
            const std::string cell = c < cells.size() ? cells[c] : std::string{};
            TableBuilder::put(r, year, is_missing(cell) ? std::nullopt
                                                        : std::optional<double>(parse_cell(cell, source, row, c + 1)));
        }
    }
    return b.finish();
}

IndicatorTable parse_long(std::istream& in, const ParseOptions& opt, const std::string& source)
{
    TableBuilder b;
    std::string line;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty())
            continue;
        const auto cells = split_csv_line(line, source, row);
        if (cells.size() != 4)
            throw ParseError(source + ": row " + std::to_string(row) + " must have four columns", row, 0);
        const std::string code(trim(cells[0]));
        const std::string series(trim(cells[1]));
        if (!opt.series_codes.contains(series)) {
            ++b.table.skipped_series[series];
            continue;
        }
        int year = 0;
        const std::string_view ytext = trim(cells[2]);
        const auto [ptr, ec] = std::from_chars(ytext.data(), ytext.data() + ytext.size(), year);
        if (ec != std::errc{} || ptr != ytext.data() + ytext.size())
            throw ParseError(source + ": malformed year '" + cells[2] + "' at row " + std::to_string(row) +
                                 ", column 3",
                             row, 3);
        if (year < opt.first_year || year > opt.last_year)
            continue;
        b.years.insert(year);
        IndicatorRow& r = b.row_for(code, code, series);
        TableBuilder::put(r, year, is_missing(cells[3]) ? std::nullopt
                                                        : std::optional<double>(parse_cell(cells[3], source, row, 4)));
    }
    return b.finish();
}

void write_optional(std::ostream& out, const std::optional<double>& v)
{
    if (v)
        out << format_number(*v);
}

json number_or_null(double v)
{
    return std::isfinite(v) ? json(v) : json(nullptr);
}

double number_from(const json& j)
{
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

constexpr const char* kResultsHeader = "code,k1,k2,alpha,g0,mse_a,mse_i,mse_s,mse_sum,accepted,type,g_max_i,n_obs";
constexpr const char* kCollapseHeader = "code,year,type,x,y,x_display,y_display";

double parse_result_number(const std::string& cell, std::size_t row, std::size_t col)
{
    const std::string_view t = trim(cell);
    if (t == "inf")
        return std::numeric_limits<double>::infinity();
    if (t == "nan")
        return std::numeric_limits<double>::quiet_NaN();
    return parse_cell(cell, "results", row, col);
}

} // namespace

const IndicatorRow* IndicatorTable::find(const std::string& country_code, const std::string& series_code) const
{
    for (const auto& row : rows)
        if (row.country_code == country_code && row.series_code == series_code)
            return &row;
    return nullptr;
}

std::optional<double> IndicatorTable::value(const std::string& country_code, const std::string& series_code,
                                            int year) const
{
    const IndicatorRow* row = find(country_code, series_code);
    if (!row)
        return std::nullopt;
    const auto it = row->values.find(year);
    return it == row->values.end() ? std::nullopt : it->second;
}

std::set<std::string> IndicatorTable::countries() const
{
    std::set<std::string> out;
    for (const auto& row : rows)
        out.insert(row.country_code);
    return out;
}

IndicatorTable parse_indicators(std::istream& in, const ParseOptions& options, const std::string& source)
{
    std::string line;
    if (!std::getline(in, line))
        throw ParseError(source + ": empty file, missing header", 1, 0);
    if (line.starts_with("\xEF\xBB\xBF"))
        line.erase(0, 3);
    const auto header = split_csv_line(line, source, 1);
    std::vector<std::string> names;
    for (const auto& h : header)
        names.emplace_back(trim(h));

    if (names.size() >= 4 && names[0] == "Country Name" && names[1] == "Country Code" && names[2] == "Series Name" &&
        names[3] == "Series Code")
        return parse_wide(in, header, options, source);
    if (names.size() == 4 && names[0] == "country_code" && names[1] == "series_code" && names[2] == "year" &&
        names[3] == "value")
        return parse_long(in, options, source);
    throw ParseError(source + ": malformed header, expected wide World Bank layout or "
                              "country_code,series_code,year,value",
                     1, 0);
}

IndicatorTable parse_indicators(const std::filesystem::path& path, const ParseOptions& options)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path.string());
    return parse_indicators(in, options, path.string());
}

void merge_tables(IndicatorTable& dst, const IndicatorTable& src)
{
    TableBuilder b;
    b.years.insert(dst.years.begin(), dst.years.end());
    b.years.insert(src.years.begin(), src.years.end());
    b.table.skipped_series = dst.skipped_series;
    for (const auto& [code, n] : src.skipped_series)
        b.table.skipped_series[code] += n;
    for (const IndicatorTable* t : {&std::as_const(dst), &src})
        for (const auto& row : t->rows) {
            IndicatorRow& r = b.row_for(row.country_code, row.country_name, row.series_code);
            for (const auto& [year, v] : row.values)
                TableBuilder::put(r, year, v);
        }
    dst = b.finish();
}

void write_indicators(const IndicatorTable& table, std::ostream& out)
{
    out << "Country Name,Country Code,Series Name,Series Code";
    for (int y : table.years)
        out << ',' << y;
    out << '\n';
    for (const auto& row : table.rows) {
        out << csv_escape(row.country_name) << ',' << csv_escape(row.country_code) << ','
            << csv_escape(row.series_code) << ',' << csv_escape(row.series_code);
        for (int y : table.years) {
            out << ',';
            const auto it = row.values.find(y);
            if (it != row.values.end())
                write_optional(out, it->second);
        }
        out << '\n';
    }
}

std::filesystem::path default_exclusions_path()
{
    return std::filesystem::path(SECTORAL_DATA_DIR) / "exclusions.txt";
}

std::set<std::string> load_exclusions(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open exclusion list " + path.string());
    std::set<std::string> codes;
    std::string line;
    while (std::getline(in, line)) {
        std::string_view v = line;
        if (const auto hash = v.find('#'); hash != std::string_view::npos)
            v = v.substr(0, hash);
        v = trim(v);
        if (!v.empty())
            codes.emplace(v);
    }
    return codes;
}

CleaningConfig CleaningConfig::defaults()
{
    CleaningConfig c;
    c.excluded_before_cutoff = load_exclusions(default_exclusions_path());
    return c;
}

AssemblyReport assemble_series(const IndicatorTable& table, const CleaningConfig& cleaning)
{
    AssemblyReport report;
    for (const auto& code : table.countries()) {
        const IndicatorRow* gdp = table.find(code, kGdpPerCapitaCode);
        const IndicatorRow* agr = table.find(code, kAgricultureCode);
        const IndicatorRow* ind = table.find(code, kIndustryCode);
        const IndicatorRow* srv = table.find(code, kServicesCode);

        CountrySeries series;
        series.code = code;
        for (const auto* r : {gdp, agr, ind, srv})
            if (r && series.name.empty())
                series.name = r->country_name;

        const bool excluded = cleaning.excluded_before_cutoff.contains(code);
        for (int year : table.years) {
            auto at = [year](const IndicatorRow* r) -> std::optional<double> {
                if (!r)
                    return std::nullopt;
                const auto it = r->values.find(year);
                return it == r->values.end() ? std::nullopt : it->second;
            };
            const auto v_gdp = at(gdp), v_a = at(agr), v_i = at(ind), v_s = at(srv);
            if (!v_gdp || !v_a || !v_i || !v_s) {
                ++report.dropped_incomplete;
                continue;
            }
            if (excluded && year < cleaning.cutoff_year) {
                ++report.dropped_cutoff;
                continue;
            }
            if (!(*v_gdp > 0.0)) {
                ++report.dropped_gdp;
                continue;
            }
            SectorShares sh{*v_a / 100.0, *v_i / 100.0, *v_s / 100.0};
            if (cleaning.renormalize_shares) {
                const double total = sh.sum();
                if (!(std::abs(total - 1.0) <= cleaning.renormalize_band)) {
                    ++report.dropped_share_band;
                    continue;
                }
                sh = {sh.a / total, sh.i / total, sh.s / total};
            }
            if (sh.a < 0.0 || sh.a > 1.0 || sh.i < 0.0 || sh.i > 1.0 || sh.s < 0.0 || sh.s > 1.0) {
                ++report.dropped_share_range;
                continue;
            }
            series.observations.push_back({year, std::log(*v_gdp), sh});
        }

        if (series.observations.size() < cleaning.min_years)
            report.insufficient.push_back(code);
        else
            report.series.push_back(std::move(series));
    }
    return report;
}

std::map<std::string, std::optional<double>> join_auxiliary(const IndicatorTable& table,
                                                            const std::string& series_code, int year)
{
    if (!std::binary_search(table.years.begin(), table.years.end(), year))
        throw UnknownYearError("year " + std::to_string(year) + " is not present in the indicator table");
    std::map<std::string, std::optional<double>> out;
    for (const auto& row : table.rows) {
        if (row.series_code != series_code)
            continue;
        const auto it = row.values.find(year);
        std::optional<double> v;
        if (it != row.values.end() && it->second)
            v = *it->second / 100.0;
        out[row.country_code] = v;
    }
    return out;
}

OutputFormat parse_format(const std::string& name)
{
    if (name == "csv")
        return OutputFormat::Csv;
    if (name == "json")
        return OutputFormat::Json;
    throw InvalidConfigError("unknown format '" + name + "', expected csv or json");
}

std::string format_number(double v)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

void write_results(const std::vector<FitResult>& results, std::ostream& out, OutputFormat format)
{
    if (format == OutputFormat::Json) {
        json arr = json::array();
        for (const auto& r : results) {
            json o = json::object();
            o["code"] = r.code;
            o["k1"] = number_or_null(r.params.k1);
            o["k2"] = number_or_null(r.params.k2);
            o["alpha"] = number_or_null(r.params.alpha);
            o["g0"] = number_or_null(r.params.g0);
            o["mse_a"] = number_or_null(r.mse_a);
            o["mse_i"] = number_or_null(r.mse_i);
            o["mse_s"] = number_or_null(r.mse_s);
            o["mse_sum"] = number_or_null(r.mse_sum);
            o["accepted"] = r.accepted;
            o["type"] = r.transfer_type ? json(*r.transfer_type) : json(nullptr);
            o["g_max_i"] = r.g_max_i ? number_or_null(*r.g_max_i) : json(nullptr);
            o["n_obs"] = r.n_obs;
            arr.push_back(std::move(o));
        }
        out << arr.dump(2) << '\n';
        return;
    }

    out << kResultsHeader << '\n';
    for (const auto& r : results) {
        out << csv_escape(r.code) << ',' << format_number(r.params.k1) << ',' << format_number(r.params.k2) << ','
            << format_number(r.params.alpha) << ',' << format_number(r.params.g0) << ',' << format_number(r.mse_a)
            << ',' << format_number(r.mse_i) << ',' << format_number(r.mse_s) << ',' << format_number(r.mse_sum)
            << ',' << (r.accepted ? "true" : "false") << ',';
        if (r.transfer_type)
            out << *r.transfer_type;
        out << ',';
        write_optional(out, r.g_max_i);
        out << ',' << r.n_obs << '\n';
    }
}

void write_results(const std::vector<FitResult>& results, const std::filesystem::path& path, OutputFormat format)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write " + path.string());
    write_results(results, out, format);
    if (!out)
        throw IoError("write failed for " + path.string());
}

std::vector<FitResult> read_results(std::istream& in, OutputFormat format)
{
    std::vector<FitResult> out;
    if (format == OutputFormat::Json) {
        json arr;
        try {
            in >> arr;
        } catch (const json::exception& e) {
            throw ParseError(std::string("results: invalid JSON: ") + e.what());
        }
        if (!arr.is_array())
            throw ParseError("results: expected a JSON array");
        try {
            for (const auto& o : arr) {
                FitResult r;
                r.code = o.at("code").get<std::string>();
                r.params = {number_from(o.at("k1")), number_from(o.at("k2")), number_from(o.at("alpha")),
                            number_from(o.at("g0"))};
                r.mse_a = number_from(o.at("mse_a"));
                r.mse_i = number_from(o.at("mse_i"));
                r.mse_s = number_from(o.at("mse_s"));
                r.mse_sum = number_from(o.at("mse_sum"));
                r.accepted = o.at("accepted").get<bool>();
                if (!o.at("type").is_null())
                    r.transfer_type = o.at("type").get<int>();
                if (!o.at("g_max_i").is_null())
                    r.g_max_i = o.at("g_max_i").get<double>();
                r.n_obs = o.at("n_obs").get<std::size_t>();
                out.push_back(std::move(r));
            }
        } catch (const json::exception& e) {
            throw ParseError(std::string("results: ") + e.what());
        }
        return out;
    }

    std::string line;
    if (!std::getline(in, line) || trim(line) != kResultsHeader)
        throw ParseError("results: malformed header, expected " + std::string(kResultsHeader), 1, 0);
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty())
            continue;
        const auto c = split_csv_line(line, "results", row);
        if (c.size() != 13)
            throw ParseError("results: row " + std::to_string(row) + " must have 13 fields", row, 0);
        FitResult r;
        r.code = c[0];
        r.params = {parse_result_number(c[1], row, 2), parse_result_number(c[2], row, 3),
                    parse_result_number(c[3], row, 4), parse_result_number(c[4], row, 5)};
        r.mse_a = parse_result_number(c[5], row, 6);
        r.mse_i = parse_result_number(c[6], row, 7);
        r.mse_s = parse_result_number(c[7], row, 8);
        r.mse_sum = parse_result_number(c[8], row, 9);
        if (c[9] != "true" && c[9] != "false")
            throw ParseError("results: accepted must be true or false at row " + std::to_string(row), row, 10);
        r.accepted = c[9] == "true";
        if (!trim(c[10]).empty())
            r.transfer_type = static_cast<int>(parse_result_number(c[10], row, 11));
        if (!trim(c[11]).empty())
            r.g_max_i = parse_result_number(c[11], row, 12);
        r.n_obs = static_cast<std::size_t>(parse_result_number(c[12], row, 13));
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<FitResult> read_results(const std::filesystem::path& path, OutputFormat format)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path.string());
    return read_results(in, format);
}

void write_collapse_points(const std::vector<CollapseRow>& rows, std::ostream& out, OutputFormat format)
{
    if (format == OutputFormat::Json) {
        json arr = json::array();
        for (const auto& r : rows) {
            json o = json::object();
            o["code"] = r.code;
            o["year"] = r.year;
            o["type"] = r.transfer_type ? json(*r.transfer_type) : json(nullptr);
            o["x"] = number_or_null(r.x);
            o["y"] = number_or_null(r.y);
            o["x_display"] = r.x_display ? number_or_null(*r.x_display) : json(nullptr);
            o["y_display"] = r.y_display ? number_or_null(*r.y_display) : json(nullptr);
            arr.push_back(std::move(o));
        }
        out << arr.dump(2) << '\n';
        return;
    }
    out << kCollapseHeader << '\n';
    for (const auto& r : rows) {
        out << csv_escape(r.code) << ',' << r.year << ',';
        if (r.transfer_type)
            out << *r.transfer_type;
        out << ',' << format_number(r.x) << ',' << format_number(r.y) << ',';
        write_optional(out, r.x_display);
        out << ',';
        write_optional(out, r.y_display);
        out << '\n';
    }
}

} // namespace sectoral
