#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qszasz/analysis.hpp"

namespace qszasz::cli {

enum class FunctionKind { poly, mono, expneg, invsq, sqrt, sin };

struct FunctionSpec {
  FunctionKind kind = FunctionKind::poly;
  std::vector<double> params;  // poly coefficients a0..ak, or the monomial degree

  /// Weight order implied by the kind: the degree for poly and mono, else 0.
  int inferred_p() const;
};

class ParseError : public std::invalid_argument {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::invalid_argument(what + " at position " + std::to_string(position)),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// "poly:a0,a1,..." | "mono:m" | "expneg" | "invsq" | "sqrt" | "sin".
FunctionSpec parse_function_spec(std::string_view text);

/// The function with analytic derivatives f2..f4. p < 0 means inferred.
WeightedFunction make_weighted_function(const FunctionSpec& spec, int p = -1);

using Cell = std::variant<std::int64_t, double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

/// %.17g; nan, inf and -inf spelled out.
std::string format_number(double v);

void write_csv(const Table& table, std::ostream& out);

/// Array of row objects keyed by column name; non-finite numbers become null.
void write_json(const Table& table, std::ostream& out);

enum ExitCode : int { ok = 0, usage = 1, numerical = 2, assertion = 3 };

/// Parses args (without the program name), runs one command and writes the
/// report to `out` or to the --out file. Diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qszasz::cli
