#pragma once

// Household dataset files and the packaged CoronaHouse fixture.
//
// CSV schema (UTF-8, comma separated, no quoting):
//   id,s0,i0,infected,generations[,<covariate>...]
// An empty `generations` field means the outbreak was observed to its end.
// Extra columns become covariates: numeric when every value parses as a
// number, categorical otherwise.

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "chainbinom/estimation.hpp"

namespace chainbinom {

struct DatasetFile {
  std::string path;
  std::vector<HouseholdObservation> records;
  std::vector<std::string> covariate_names;
  /// Non-fatal findings (duplicate ids, households without susceptibles).
  std::vector<std::string> warnings;
};

/// Parses the CSV schema from a stream. `source` names the input in
/// diagnostics. Throws DataError naming the line and column on bad input.
DatasetFile parse_csv(std::istream& in, const std::string& source);

/// Throws DataError when the file cannot be opened or parsed.
DatasetFile load_csv(const std::string& path);

/// Writes the CSV schema; numbers use the shortest round-trip form.
void write_csv(std::ostream& out, std::span<const HouseholdObservation> records,
               const std::vector<std::string>& covariate_names);

/// The 52 CoronaHouse households (166 members) with a categorical `variant`
/// covariate in {nonvoc, alpha}, all observed to the end of the outbreak.
DatasetFile coronahouse_fixture();

/// Records whose covariate `name` renders as `value`.
std::vector<HouseholdObservation> filter_records(std::span<const HouseholdObservation> records,
                                                 const std::string& name,
                                                 const std::string& value);

/// Shortest decimal form that parses back to the same double.
std::string format_number(double value);

}  // namespace chainbinom
