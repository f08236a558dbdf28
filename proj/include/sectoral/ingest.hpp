#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sectoral/fit.hpp"

namespace sectoral {

inline constexpr const char* kGdpPerCapitaCode = "NY.GDP.PCAP.PP.KD";
inline constexpr const char* kAgricultureCode = "NV.AGR.TOTL.ZS";
inline constexpr const char* kIndustryCode = "NV.IND.TOTL.ZS";
inline constexpr const char* kServicesCode = "NV.SRV.TETC.ZS";
inline constexpr const char* kRuralPopulationCode = "SP.RUR.TOTL.ZS";

struct IndicatorRow {
    std::string country_code;
    std::string country_name;
    std::string series_code;
    std::map<int, std::optional<double>> values;  ///< year -> value, absent when the cell was empty
};

struct IndicatorTable {
    std::vector<IndicatorRow> rows;
    std::vector<int> years;                          ///< ascending
    std::map<std::string, std::size_t> skipped_series;  ///< unknown series code -> row count

    const IndicatorRow* find(const std::string& country_code, const std::string& series_code) const;
    std::optional<double> value(const std::string& country_code, const std::string& series_code, int year) const;
    std::set<std::string> countries() const;
};

struct ParseOptions {
    std::set<std::string> series_codes{kGdpPerCapitaCode, kAgricultureCode, kIndustryCode, kServicesCode};
    int first_year = 1980;
    int last_year = 2005;
};

/// Reads the wide layout
///   Country Name,Country Code,Series Name,Series Code,1980,...,2005
/// or the long layout country_code,series_code,year,value, chosen by header.
/// Year headers may carry a DataBank suffix ("1980 [YR1980]"). Empty cells and ".."
/// are missing values. Numbers are parsed strictly; anything else raises ParseError
/// with the 1-based row and column. Repeated (country, series) rows are merged,
/// later present cells winning.
IndicatorTable parse_indicators(std::istream& in, const ParseOptions& options = {},
                                const std::string& source = "<stream>");
IndicatorTable parse_indicators(const std::filesystem::path& path, const ParseOptions& options = {});

/// Merges src into dst with the same rules as repeated rows within one file.
void merge_tables(IndicatorTable& dst, const IndicatorTable& src);

/// Writes the wide layout with shortest round-trip number formatting.
void write_indicators(const IndicatorTable& table, std::ostream& out);

struct CleaningConfig {
    int cutoff_year = 1995;
    std::set<std::string> excluded_before_cutoff;
    std::size_t min_years = 4;
    bool renormalize_shares = true;
    double renormalize_band = 0.05;  ///< max |a + i + s - 1| before the year is dropped

    /// Defaults with the exclusion list shipped in data/exclusions.txt.
    static CleaningConfig defaults();
};

/// Path of the bundled exclusion list.
std::filesystem::path default_exclusions_path();

/// One country code per line; '#' starts a comment.
std::set<std::string> load_exclusions(const std::filesystem::path& path);

struct AssemblyReport {
    std::vector<CountrySeries> series;      ///< ordered by country code
    std::vector<std::string> insufficient;  ///< countries below min_years after cleaning
    std::size_t dropped_incomplete = 0;     ///< years missing one of the four values
    std::size_t dropped_gdp = 0;            ///< GDP/cap not positive
    std::size_t dropped_cutoff = 0;         ///< excluded country, year before the cutoff
    std::size_t dropped_share_band = 0;     ///< share sum outside the renormalization band
    std::size_t dropped_share_range = 0;    ///< a share outside [0, 1]
};

/// Builds cleaned country series: g = ln(GDP/cap), shares = percent / 100.
AssemblyReport assemble_series(const IndicatorTable& table, const CleaningConfig& cleaning);

/// Indicator percentage / 100 per country for one year. Throws UnknownYearError
/// when the year is not a column of the table.
std::map<std::string, std::optional<double>> join_auxiliary(const IndicatorTable& table,
                                                            const std::string& series_code, int year);

enum class OutputFormat { Csv, Json };

OutputFormat parse_format(const std::string& name);

void write_results(const std::vector<FitResult>& results, std::ostream& out, OutputFormat format);
void write_results(const std::vector<FitResult>& results, const std::filesystem::path& path, OutputFormat format);
std::vector<FitResult> read_results(std::istream& in, OutputFormat format);
std::vector<FitResult> read_results(const std::filesystem::path& path, OutputFormat format);

struct CollapseRow {
    std::string code;
    int year = 0;
    std::optional<int> transfer_type;
    double x = 0.0;
    double y = 0.0;
    std::optional<double> x_display;
    std::optional<double> y_display;
};

void write_collapse_points(const std::vector<CollapseRow>& rows, std::ostream& out, OutputFormat format);

/// Shortest decimal text that reads back to the same double.
std::string format_number(double v);

} // namespace sectoral
