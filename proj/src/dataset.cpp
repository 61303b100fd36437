#include "chainbinom/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>

#include "chainbinom/errors.hpp"

namespace chainbinom {

namespace {

const std::vector<std::string> kRequiredColumns{"id", "s0", "i0", "infected", "generations"};

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

bool parse_double(const std::string& text, double& out) {
  if (text.empty()) return false;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (*first == '+') ++first;
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last;
}

class LineError {
 public:
  LineError(const std::string& source, std::size_t line) : source_(source), line_(line) {}
  [[noreturn]] void fail(const std::string& column, const std::string& what) const {
    throw DataError(source_ + ": line " + std::to_string(line_) + ", column '" + column + "': " +
                    what);
  }

 private:
  const std::string& source_;
  std::size_t line_;
};

int parse_count(const std::string& text, const std::string& column, const LineError& where) {
  int value = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    where.fail(column, "expected an integer, got '" + text + "'");
  }
  return value;
}

}  // namespace

std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

DatasetFile parse_csv(std::istream& in, const std::string& source) {
  DatasetFile file;
  file.path = source;

  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    header = split_fields(line);
    break;
  }
  if (header.empty()) throw DataError(source + ": missing header row");
  if (header.size() < kRequiredColumns.size() ||
      !std::equal(kRequiredColumns.begin(), kRequiredColumns.end(), header.begin())) {
    throw DataError(source + ": header must start with id,s0,i0,infected,generations");
  }
  std::set<std::string> seen_columns(header.begin(), header.end());
  if (seen_columns.size() != header.size()) throw DataError(source + ": duplicate column names");
  file.covariate_names.assign(header.begin() + kRequiredColumns.size(), header.end());
  for (const auto& name : file.covariate_names) {
    if (name.empty()) throw DataError(source + ": empty covariate column name");
  }

  // Raw covariate text per record; typed once every row is read.
  std::vector<std::vector<std::string>> raw;
  std::vector<std::size_t> record_lines;
  std::set<std::string> ids;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const LineError where(source, line_no);
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw DataError(source + ": line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    }
    HouseholdObservation obs;
    obs.id = fields[0];
    if (obs.id.empty()) where.fail("id", "empty household id");
    obs.s0 = parse_count(fields[1], "s0", where);
    obs.i0 = parse_count(fields[2], "i0", where);
    obs.infected = parse_count(fields[3], "infected", where);
    if (fields[4].empty()) {
      obs.horizon = Horizon::final_size();
    } else {
      const int d = parse_count(fields[4], "generations", where);
      if (d < 1) where.fail("generations", "must be at least 1 or empty for final");
      obs.horizon = Horizon::after(d);
    }
    if (obs.s0 < 0) where.fail("s0", "must be nonnegative");
    if (obs.i0 < 1) where.fail("i0", "must be at least 1");
    if (obs.infected < 0) where.fail("infected", "must be nonnegative");
    if (obs.infected > obs.s0) {
      where.fail("infected", "infected (" + fields[3] + ") exceeds s0 (" + fields[1] + ")");
    }
    if (!ids.insert(obs.id).second) {
      file.warnings.push_back(source + ": line " + std::to_string(line_no) +
                              ": duplicate household id '" + obs.id + "'");
    }
    if (obs.s0 == 0) {
      file.warnings.push_back(source + ": line " + std::to_string(line_no) + ": household '" +
                              obs.id + "' has no susceptibles and carries no information");
    }
    raw.emplace_back(fields.begin() + kRequiredColumns.size(), fields.end());
    record_lines.push_back(line_no);
    file.records.push_back(std::move(obs));
  }
  if (file.records.empty()) throw DataError(source + ": no data rows");

  for (std::size_t c = 0; c < file.covariate_names.size(); ++c) {
    bool numeric = true;
    for (const auto& row : raw) {
      double ignored;
      if (!row[c].empty() && !parse_double(row[c], ignored)) numeric = false;
    }
    for (std::size_t r = 0; r < raw.size(); ++r) {
      const std::string& text = raw[r][c];
      if (text.empty()) continue;  // missing; reported if the covariate is used
      if (numeric) {
        double value = 0.0;
        parse_double(text, value);
        file.records[r].covariates.emplace(file.covariate_names[c], value);
      } else {
        file.records[r].covariates.emplace(file.covariate_names[c], text);
      }
    }
  }
  return file;
}

DatasetFile load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset '" + path + "'");
  return parse_csv(in, path);
}

void write_csv(std::ostream& out, std::span<const HouseholdObservation> records,
               const std::vector<std::string>& covariate_names) {
  out << "id,s0,i0,infected,generations";
  for (const auto& name : covariate_names) out << ',' << name;
  out << '\n';
  for (const auto& obs : records) {
    out << obs.id << ',' << obs.s0 << ',' << obs.i0 << ',' << obs.infected << ',';
    if (!obs.horizon.is_final()) out << obs.horizon.generations();
    for (const auto& name : covariate_names) {
      out << ',';
      if (auto it = obs.covariates.find(name); it != obs.covariates.end()) {
        out << covariate_to_string(it->second);
      }
    }
    out << '\n';
  }
}

DatasetFile coronahouse_fixture() {
  struct Cell {
    const char* variant;
    int size;
    int i0;
    int infected;
    int households;
  };
  // Household counts by variant, household size, index cases and secondary
  // cases. Impossible or empty combinations are omitted.
  static constexpr Cell kCells[] = {
      {"nonvoc", 2, 1, 0, 8}, {"nonvoc", 2, 1, 1, 7},
      {"nonvoc", 3, 1, 0, 2}, {"nonvoc", 3, 1, 1, 3}, {"nonvoc", 3, 1, 2, 3},
      {"nonvoc", 4, 1, 0, 5}, {"nonvoc", 4, 1, 2, 1}, {"nonvoc", 4, 1, 3, 1},
      {"nonvoc", 4, 2, 0, 1}, {"nonvoc", 4, 3, 0, 1},
      {"nonvoc", 5, 1, 0, 2}, {"nonvoc", 5, 1, 1, 1}, {"nonvoc", 5, 1, 2, 1},
      {"nonvoc", 6, 1, 3, 1}, {"nonvoc", 6, 1, 5, 1},
      {"alpha", 2, 1, 0, 1},  {"alpha", 2, 1, 1, 5},
      {"alpha", 4, 1, 0, 1},  {"alpha", 4, 1, 1, 1},  {"alpha", 4, 1, 3, 5},
      {"alpha", 4, 2, 2, 1},
  };

  DatasetFile file;
  file.path = "coronahouse";
  file.covariate_names = {"variant"};
  int next_id = 1;
  for (const Cell& cell : kCells) {
    for (int k = 0; k < cell.households; ++k) {
      HouseholdObservation obs;
      char id[16];
      std::snprintf(id, sizeof id, "ch%02d", next_id++);
      obs.id = id;
      obs.s0 = cell.size - cell.i0;
      obs.i0 = cell.i0;
      obs.infected = cell.infected;
      obs.horizon = Horizon::final_size();
      obs.covariates.emplace("variant", std::string(cell.variant));
      file.records.push_back(std::move(obs));
    }
  }
  return file;
}

std::vector<HouseholdObservation> filter_records(std::span<const HouseholdObservation> records,
                                                 const std::string& name,
                                                 const std::string& value) {
  std::vector<HouseholdObservation> out;
  double numeric = 0.0;
  const bool value_is_number = parse_double(value, numeric);
  for (const auto& obs : records) {
    const auto it = obs.covariates.find(name);
    if (it == obs.covariates.end()) continue;
    const bool match = std::holds_alternative<double>(it->second) && value_is_number
                           ? std::get<double>(it->second) == numeric
                           : covariate_to_string(it->second) == value;
    if (match) out.push_back(obs);
  }
  return out;
}

}  // namespace chainbinom
