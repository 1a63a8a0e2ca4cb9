#include <charconv>
#include <cmath>
#include <string>
#include <system_error>
#include <type_traits>

#include <boost/multiprecision/mpfr.hpp>

#include "qszasz/cli.hpp"

namespace qszasz::cli {

namespace {

constexpr int kMaxMonomialDegree = 12;

double parse_real(std::string_view text, std::size_t offset) {
  if (text.empty()) throw ParseError("expected a number", offset);
  if (text.front() == '+') {
    text.remove_prefix(1);
    ++offset;
  }
  double v = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size()) {
    const std::size_t bad = ec == std::errc() ? static_cast<std::size_t>(end - text.data()) : 0;
    throw ParseError("malformed number '" + std::string(text) + "'", offset + bad);
  }
  if (!std::isfinite(v)) throw ParseError("number is not finite", offset);
  return v;
}

std::vector<double> parse_list(std::string_view text, std::size_t offset) {
  if (text.empty()) throw ParseError("empty coefficient list", offset);
  std::vector<double> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = text.find(',', start);
    const auto item = text.substr(start, comma == std::string_view::npos ? text.npos : comma - start);
    out.push_back(parse_real(item, offset + start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<double> derivative(const std::vector<double>& c) {
  std::vector<double> d;
  for (std::size_t k = 1; k < c.size(); ++k) d.push_back(c[k] * static_cast<double>(k));
  if (d.empty()) d.push_back(0.0);
  return d;
}

double horner(const std::vector<double>& c, double t) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * t + *it;
  return acc;
}

std::function<double(double)> poly_fn(std::vector<double> c) {
  return [c = std::move(c)](double t) { return horner(c, t); };
}

WeightedFunction polynomial(std::vector<double> c, int p) {
  WeightedFunction wf;
  wf.f = RealFunction::generic([c](const auto& t) {
    using Real = std::decay_t<decltype(t)>;
    Real acc = 0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * t + Real(*it);
    return acc;
  });
  wf.p = p;
  const auto d2 = derivative(derivative(c));
  const auto d3 = derivative(d2);
  wf.f2 = poly_fn(d2);
  wf.f3 = poly_fn(d3);
  wf.f4 = poly_fn(derivative(d3));
  return wf;
}

}  // namespace

int FunctionSpec::inferred_p() const {
  switch (kind) {
    case FunctionKind::poly: {
      int degree = 0;
      for (std::size_t k = 0; k < params.size(); ++k) {
        if (params[k] != 0.0) degree = static_cast<int>(k);
      }
      return degree;
    }
    case FunctionKind::mono:
      return static_cast<int>(params.at(0));
    default:
      return 0;
  }
}

FunctionSpec parse_function_spec(std::string_view text) {
  if (text.empty()) throw ParseError("empty function spec", 0);
  const std::size_t colon = text.find(':');
  const auto name = text.substr(0, colon);
  const bool has_args = colon != std::string_view::npos;
  const auto args = has_args ? text.substr(colon + 1) : std::string_view{};
  const std::size_t args_at = has_args ? colon + 1 : text.size();

  FunctionSpec spec;
  if (name == "poly") {
    if (!has_args) throw ParseError("poly needs coefficients", text.size());
    spec.kind = FunctionKind::poly;
    spec.params = parse_list(args, args_at);
    return spec;
  }
  if (name == "mono") {
    if (!has_args || args.empty()) throw ParseError("mono needs a degree", args_at);
    int m = 0;
    const auto [end, ec] = std::from_chars(args.data(), args.data() + args.size(), m);
    if (ec != std::errc() || end != args.data() + args.size()) {
      throw ParseError("malformed degree '" + std::string(args) + "'", args_at);
    }
    if (m < 0 || m > kMaxMonomialDegree) throw ParseError("mono degree must be in 0..12", args_at);
    spec.kind = FunctionKind::mono;
    spec.params = {static_cast<double>(m)};
    return spec;
  }
  if (name == "expneg") {
    spec.kind = FunctionKind::expneg;
  } else if (name == "invsq") {
    spec.kind = FunctionKind::invsq;
  } else if (name == "sqrt") {
    spec.kind = FunctionKind::sqrt;
  } else if (name == "sin") {
    spec.kind = FunctionKind::sin;
  } else {
    throw ParseError("unknown function kind '" + std::string(name) + "'", 0);
  }
  if (has_args) throw ParseError("'" + std::string(name) + "' takes no parameters", colon);
  return spec;
}

WeightedFunction make_weighted_function(const FunctionSpec& spec, int p) {
  const int order = p < 0 ? spec.inferred_p() : p;
  switch (spec.kind) {
    case FunctionKind::poly:
      return polynomial(spec.params, order);
    case FunctionKind::mono: {
      std::vector<double> c(static_cast<std::size_t>(spec.params.at(0)) + 1, 0.0);
      c.back() = 1.0;
      return polynomial(c, order);
    }
    case FunctionKind::expneg:
      return {RealFunction::generic([](const auto& t) {
                using std::exp;
                return exp(-t);
              }),
              order, [](double t) { return std::exp(-t); }, [](double t) { return -std::exp(-t); },
              [](double t) { return std::exp(-t); }};
    case FunctionKind::invsq:
      return {RealFunction::generic([](const auto& t) {
                using Real = std::decay_t<decltype(t)>;
                return Real(1) / (Real(1) + t * t);
              }),
              order,
              [](double t) {
                const double u = 1.0 + t * t;
                return (6.0 * t * t - 2.0) / (u * u * u);
              },
              [](double t) {
                const double u = 1.0 + t * t;
                return 24.0 * t * (1.0 - t * t) / (u * u * u * u);
              },
              [](double t) {
                const double u = 1.0 + t * t;
                const double t2 = t * t;
                return 24.0 * (5.0 * t2 * t2 - 10.0 * t2 + 1.0) / (u * u * u * u * u);
              }};
    case FunctionKind::sqrt:
      return {RealFunction::generic([](const auto& t) {
                using std::sqrt;
                return sqrt(t);
              }),
              order, [](double t) { return -0.25 * std::pow(t, -1.5); },
              [](double t) { return 0.375 * std::pow(t, -2.5); },
              [](double t) { return -0.9375 * std::pow(t, -3.5); }};
    case FunctionKind::sin:
      return {RealFunction::generic([](const auto& t) {
                using std::sin;
                return sin(t);
              }),
              order, [](double t) { return -std::sin(t); }, [](double t) { return -std::cos(t); },
              [](double t) { return std::sin(t); }};
  }
  throw std::invalid_argument("unhandled function kind");
}

}  // namespace qszasz::cli
