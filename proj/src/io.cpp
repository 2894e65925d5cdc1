#include "dex/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace dex {

using nlohmann::json;

namespace {

[[noreturn]] void fail(std::string_view where, const std::string& message) {
  throw std::invalid_argument(std::string(where) + ": " + message);
}

std::string at(std::string_view base, std::string_view key) { return std::string(base) + "." + std::string(key); }
std::string at(std::string_view base, std::size_t index) {
  return std::string(base) + "[" + std::to_string(index) + "]";
}

const json& require(const json& doc, std::string_view key, std::string_view where) {
  if (!doc.is_object()) fail(where, "expected an object");
  const auto it = doc.find(std::string(key));
  if (it == doc.end()) fail(where, "missing field '" + std::string(key) + "'");
  return *it;
}

std::uint64_t unsigned_from_json(const json& value, std::string_view where) {
  if (!value.is_number_integer() || value.get<std::int64_t>() < 0) fail(where, "expected a nonnegative integer");
  return value.get<std::uint64_t>();
}

std::vector<std::size_t> index_list(const json& value, std::string_view where, std::size_t bound) {
  if (!value.is_array()) fail(where, "expected an array of indices");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < value.size(); ++i) {
    const auto v = unsigned_from_json(value[i], at(where, i));
    if (v >= bound) fail(at(where, i), "index " + std::to_string(v) + " out of range (< " + std::to_string(bound) + ")");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

TerminalSet mask_of(const std::vector<std::size_t>& indices) {
  TerminalSet s = 0;
  for (auto i : indices) s |= singleton(i);
  return s;
}

json index_array(TerminalSet set) {
  json out = json::array();
  for (auto i : members(set)) out.push_back(i);
  return out;
}

void check_version(const json& doc, std::string_view where) {
  if (!doc.is_object()) fail(where, "expected a JSON object");
  if (const auto it = doc.find("format_version"); it != doc.end()) {
    if (!it->is_number_integer() || it->get<int>() != kFormatVersion) {
      fail(at(where, "format_version"), "unsupported format version (expected " + std::to_string(kFormatVersion) + ")");
    }
  }
}

}  // namespace

json rational_to_json(const Rational& value) { return to_string(value); }

Rational rational_from_json(const json& value, std::string_view where) {
  try {
    if (value.is_string()) return parse_rational(value.get<std::string>());
    if (value.is_number_integer()) return Rational(value.get<std::int64_t>());
    if (value.is_number_float()) return parse_rational(value.dump());
  } catch (const std::invalid_argument& e) {
    fail(where, e.what());
  }
  fail(where, "expected a rational number (\"p/q\" string or JSON number)");
}

json field_to_json(const Field& field) {
  json out{{"characteristic", field.characteristic()}, {"degree", field.degree()}};
  if (field.degree() > 1) {
    out["modulus"] = std::vector<std::uint32_t>(field.modulus().begin(), field.modulus().end());
  }
  return out;
}

Field field_from_json(const json& doc, std::string_view where) {
  const auto p = unsigned_from_json(require(doc, "characteristic", where), at(where, "characteristic"));
  std::uint64_t w = 1;
  if (doc.contains("degree")) w = unsigned_from_json(doc["degree"], at(where, "degree"));
  try {
    if (doc.contains("modulus")) {
      auto modulus = doc["modulus"].get<std::vector<std::uint32_t>>();
      Field f = Field::with_modulus(static_cast<std::uint32_t>(p), std::move(modulus));
      if (f.degree() != w) fail(at(where, "modulus"), "modulus degree does not match field degree");
      return f;
    }
    return Field::make(static_cast<std::uint32_t>(p), static_cast<unsigned>(w));
  } catch (const json::exception& e) {
    fail(where, e.what());
  } catch (const std::invalid_argument& e) {
    fail(where, e.what());
  }
}

Instance instance_from_json(const json& doc, const FieldOverride& override_field) {
  check_version(doc, "instance");
  const json* terminals = doc.contains("terminals") ? &doc["terminals"] : nullptr;
  if (terminals && !terminals->is_array()) fail("terminals", "expected an array");

  bool has_rows = false, has_packets = false;
  if (terminals) {
    for (const auto& t : *terminals) {
      if (!t.is_object()) fail("terminals", "each terminal must be an object");
      has_rows = has_rows || t.contains("rows");
      has_packets = has_packets || t.contains("packets");
    }
  }
  const bool has_table = doc.contains("entropy_table");
  const int forms = int{has_rows} + int{has_packets} + int{has_table};
  if (forms != 1) {
    fail("instance", forms == 0 ? "needs one of terminal rows, terminal packets or entropy_table"
                                : "exactly one of terminal rows, terminal packets or entropy_table may be present");
  }

  std::optional<SourceModel> model;
  if (has_table) {
    const auto& table_json = doc["entropy_table"];
    if (!table_json.is_array()) fail("entropy_table", "expected an array");
    std::size_t m = 0;
    if (terminals) {
      m = terminals->size();
    } else {
      m = static_cast<std::size_t>(unsigned_from_json(require(doc, "terminal_count", "instance"), "terminal_count"));
    }
    if (m == 0 || m > kMaxTerminals) fail("terminals", "terminal count out of range");
    EntropyTable table{m, {}};
    for (std::size_t s = 0; s < table_json.size(); ++s) {
      table.values.push_back(rational_from_json(table_json[s], at("entropy_table", s)));
    }
    try {
      model = SourceModel::tabular(std::move(table));
    } catch (const std::invalid_argument& e) {
      fail("entropy_table", e.what());
    }
  } else {
    Field field = Field::make(2);
    if (doc.contains("field")) field = field_from_json(doc["field"], "field");
    if (override_field.characteristic || override_field.degree) {
      try {
        field = Field::make(override_field.characteristic.value_or(field.characteristic()),
                            override_field.degree.value_or(field.degree()));
      } catch (const std::invalid_argument& e) {
        fail("--field-char/--field-degree", e.what());
      }
    }
    const auto n = static_cast<std::size_t>(unsigned_from_json(require(doc, "packet_count", "instance"), "packet_count"));
    if (terminals->empty() || terminals->size() > kMaxTerminals) fail("terminals", "terminal count out of range");
    if (has_packets) {
      std::vector<std::vector<std::size_t>> ownership;
      for (std::size_t i = 0; i < terminals->size(); ++i) {
        const auto where = at("terminals", i);
        ownership.push_back(index_list(require((*terminals)[i], "packets", where), at(where, "packets"), n));
      }
      model = SourceModel::raw(std::move(ownership), n, field);
    } else {
      std::vector<FieldMatrix> matrices;
      for (std::size_t i = 0; i < terminals->size(); ++i) {
        const auto where = at("terminals", i);
        const auto& rows = require((*terminals)[i], "rows", where);
        if (!rows.is_array()) fail(at(where, "rows"), "expected an array of rows");
        FieldMatrix a(field, rows.size(), n);
        for (std::size_t r = 0; r < rows.size(); ++r) {
          const auto row_where = at(at(where, "rows"), r);
          if (!rows[r].is_array() || rows[r].size() != n) {
            fail(row_where, "expected a row of " + std::to_string(n) + " field elements");
          }
          for (std::size_t c = 0; c < n; ++c) {
            const auto v = unsigned_from_json(rows[r][c], at(row_where, c));
            if (v >= field.order()) {
              fail(at(row_where, c), "entry " + std::to_string(v) + " is not an element of " + field.name());
            }
            a.set(r, c, static_cast<Field::Element>(v));
          }
        }
        matrices.push_back(std::move(a));
      }
      model = SourceModel::linear(LinearSource(field, n, std::move(matrices)));
    }
  }

  const std::size_t m = model->terminal_count();
  const TerminalSet users = mask_of(index_list(require(doc, "users", "instance"), "users", m));
  std::vector<Rational> weights;
  if (doc.contains("weights")) {
    const auto& w = doc["weights"];
    if (!w.is_array() || w.size() != m) fail("weights", "expected " + std::to_string(m) + " weights");
    for (std::size_t i = 0; i < m; ++i) weights.push_back(rational_from_json(w[i], at("weights", i)));
  } else {
    weights.assign(m, Rational(1));
  }
  std::optional<TerminalSet> transmitters;
  if (doc.contains("transmitters")) transmitters = mask_of(index_list(doc["transmitters"], "transmitters", m));
  try {
    return Instance(std::move(*model), users, std::move(weights), transmitters);
  } catch (const std::invalid_argument& e) {
    fail("instance", e.what());
  }
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument(path.string() + ": cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

Instance parse_instance(const std::filesystem::path& path, const FieldOverride& override_field) {
  const json doc = read_json_file(path);
  try {
    return instance_from_json(doc, override_field);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

json instance_to_json(const Instance& instance) {
  const SourceModel& model = instance.model();
  json doc{{"format_version", kFormatVersion}};
  json terminals = json::array();
  switch (model.kind()) {
    case SourceModel::Kind::tabular: {
      json table = json::array();
      for (const auto& v : model.table()->values) table.push_back(rational_to_json(v));
      for (std::size_t i = 0; i < model.terminal_count(); ++i) terminals.push_back({{"name", "T" + std::to_string(i)}});
      doc["entropy_table"] = std::move(table);
      break;
    }
    case SourceModel::Kind::raw: {
      const auto* source = model.linear_source();
      doc["field"] = field_to_json(source->field());
      doc["packet_count"] = source->packet_count();
      for (std::size_t i = 0; i < model.terminal_count(); ++i) {
        terminals.push_back({{"name", "T" + std::to_string(i)}, {"packets", model.ownership()[i]}});
      }
      break;
    }
    case SourceModel::Kind::linear: {
      const auto* source = model.linear_source();
      doc["field"] = field_to_json(source->field());
      doc["packet_count"] = source->packet_count();
      for (std::size_t i = 0; i < model.terminal_count(); ++i) {
        const auto& a = source->observation(i);
        json rows = json::array();
        for (std::size_t r = 0; r < a.rows(); ++r) {
          rows.push_back(std::vector<Field::Element>(a.row(r).begin(), a.row(r).end()));
        }
        terminals.push_back({{"name", "T" + std::to_string(i)}, {"rows", std::move(rows)}});
      }
      break;
    }
  }
  doc["terminals"] = std::move(terminals);
  doc["users"] = index_array(instance.users());
  json weights = json::array();
  for (const auto& w : instance.weights()) weights.push_back(rational_to_json(w));
  doc["weights"] = std::move(weights);
  if (instance.restricted()) doc["transmitters"] = index_array(instance.transmitters());
  return doc;
}

RateVector parse_rate_list(std::string_view text) {
  RateVector out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto piece = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    out.push_back(parse_rational(piece));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<std::size_t> parse_index_list(std::string_view text) {
  std::vector<std::size_t> out;
  for (const auto& r : parse_rate_list(text)) {
    if (r < 0 || boost::multiprecision::denominator(r) != 1) {
      throw std::invalid_argument("expected nonnegative integer indices");
    }
    out.push_back(boost::multiprecision::numerator(r).convert_to<std::size_t>());
  }
  return out;
}

json solution_to_json(const Solution& solution, const Instance& instance) {
  json rates = json::array(), decimals = json::array();
  for (const auto& r : solution.rates) {
    rates.push_back(rational_to_json(r));
    decimals.push_back(to_double(r));
  }
  json multipliers = json::array();
  for (std::size_t l = 0; l < solution.certificate.rows(); ++l) {
    json row = json::array();
    for (const auto& x : solution.certificate.row_weights(l)) row.push_back(rational_to_json(x));
    multipliers.push_back(std::move(row));
  }
  json doc{{"format_version", kFormatVersion},
           {"kind", "solution"},
           {"rates", std::move(rates)},
           {"rates_decimal", std::move(decimals)},
           {"objective", rational_to_json(solution.primal_objective)},
           {"objective_decimal", to_double(solution.primal_objective)},
           {"dual_objective", rational_to_json(solution.dual_objective)},
           {"dual_objective_decimal", to_double(solution.dual_objective)},
           {"gap", rational_to_json(solution.gap)},
           {"gap_decimal", to_double(solution.gap)},
           {"iterations", solution.iterations},
           {"converged", solution.converged},
           {"users", index_array(instance.users())},
           {"multipliers", std::move(multipliers)}};
  if (const auto field = instance.model().field()) {
    const double bits = std::log2(static_cast<double>(field->order()));
    doc["bits_per_symbol"] = bits;
    doc["objective_bits"] = bits * to_double(solution.primal_objective);
  }
  return doc;
}

RateVector rates_from_solution_json(const json& doc) {
  check_version(doc, "solution");
  const auto& rates = require(doc, "rates", "solution");
  if (!rates.is_array()) fail("solution.rates", "expected an array");
  RateVector out;
  for (std::size_t i = 0; i < rates.size(); ++i) out.push_back(rational_from_json(rates[i], at("solution.rates", i)));
  return out;
}

json lp_to_json(const CutSetLP& lp, const LpSolution& solution) {
  json constraints = json::array();
  for (const auto& c : lp.constraints) {
    constraints.push_back({{"subset", index_array(c.subset)},
                           {"mask", c.subset},
                           {"rhs", rational_to_json(c.rhs)},
                           {"user", c.owner}});
  }
  json rates = json::array();
  for (const auto& r : solution.rates) rates.push_back(rational_to_json(r));
  return json{{"format_version", kFormatVersion},
              {"kind", "oracle"},
              {"constraints", std::move(constraints)},
              {"rates", std::move(rates)},
              {"objective", rational_to_json(solution.value)},
              {"objective_decimal", to_double(solution.value)}};
}

json scheme_to_json(const TransmissionScheme& scheme) {
  json terminals = json::array();
  for (std::size_t i = 0; i < scheme.coding_matrices.size(); ++i) {
    const auto& v = scheme.coding_matrices[i];
    json rows = json::array();
    for (std::size_t r = 0; r < v.rows(); ++r) rows.push_back(std::vector<Field::Element>(v.row(r).begin(), v.row(r).end()));
    terminals.push_back({{"terminal", i}, {"chunk_rate", scheme.chunk_rates[i]}, {"rows", std::move(rows)}});
  }
  return json{{"format_version", kFormatVersion},
              {"kind", "scheme"},
              {"field", field_to_json(scheme.source.field())},
              {"coding_field", field_to_json(scheme.coding_field)},
              {"extension_degree", scheme.extension_degree},
              {"chunk_factor", scheme.chunk_factor},
              {"packet_count", scheme.source.packet_count()},
              {"users", index_array(scheme.users)},
              {"terminals", std::move(terminals)}};
}

TransmissionScheme scheme_from_json(const json& doc, const Instance& instance) {
  check_version(doc, "scheme");
  const LinearSource* source = instance.model().linear_source();
  if (source == nullptr) fail("scheme", "instance has no linear source");
  const Field base = field_from_json(require(doc, "field", "scheme"), "scheme.field");
  if (!(base == source->field())) fail("scheme.field", "does not match the instance field " + source->field().name());
  const Field coding = field_from_json(require(doc, "coding_field", "scheme"), "scheme.coding_field");
  const auto chunk_factor = unsigned_from_json(require(doc, "chunk_factor", "scheme"), "scheme.chunk_factor");
  if (chunk_factor == 0) fail("scheme.chunk_factor", "must be positive");
  const auto& terminals = require(doc, "terminals", "scheme");
  const std::size_t m = instance.terminal_count();
  if (!terminals.is_array() || terminals.size() != m) fail("scheme.terminals", "expected one entry per terminal");

  TransmissionScheme scheme{.source = *source,
                            .users = instance.users(),
                            .coding_field = coding,
                            .extension_degree = static_cast<unsigned>(unsigned_from_json(
                                require(doc, "extension_degree", "scheme"), "scheme.extension_degree")),
                            .chunk_factor = chunk_factor,
                            .chunk_rates = {},
                            .coding_matrices = {}};
  for (std::size_t i = 0; i < m; ++i) {
    const auto where = at("scheme.terminals", i);
    const auto& t = terminals[i];
    const auto r = unsigned_from_json(require(t, "chunk_rate", where), at(where, "chunk_rate"));
    const auto& rows = require(t, "rows", where);
    const std::size_t cols = source->observation(i).rows() * chunk_factor;
    if (!rows.is_array() || rows.size() != r) fail(at(where, "rows"), "expected " + std::to_string(r) + " rows");
    FieldMatrix v(coding, r, cols);
    for (std::size_t row = 0; row < r; ++row) {
      const auto row_where = at(at(where, "rows"), row);
      if (!rows[row].is_array() || rows[row].size() != cols) {
        fail(row_where, "expected " + std::to_string(cols) + " entries");
      }
      for (std::size_t c = 0; c < cols; ++c) {
        const auto x = unsigned_from_json(rows[row][c], at(row_where, c));
        if (x >= coding.order()) fail(at(row_where, c), "not an element of " + coding.name());
        v.set(row, c, static_cast<Field::Element>(x));
      }
    }
    scheme.chunk_rates.push_back(r);
    scheme.coding_matrices.push_back(std::move(v));
  }
  return scheme;
}

json trace_to_json(const TraceRecord& record) {
  return json{{"iteration", record.iteration},
              {"primal", static_cast<double>(record.primal)},
              {"dual", static_cast<double>(record.dual)},
              {"gap", static_cast<double>(record.gap)}};
}

}  // namespace dex
