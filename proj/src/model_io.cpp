#include "cyscm/model_io.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cyscm/errors.hpp"
#include "json.hpp"

namespace cyscm {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
    // nlohmann reports the 1-based index of the last byte read
    const std::size_t end = std::min(byte == 0 ? 0 : byte - 1, text.size());
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < end; ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

const json& member(const json& object, const char* key, const std::string& field) {
    auto it = object.find(key);
    if (it == object.end()) throw SchemaError(field, std::string("missing required field '") + key + "'");
    return *it;
}

double number(const json& value, const std::string& field) {
    if (!value.is_number()) throw SchemaError(field, "expected a number");
    return value.get<double>();
}

std::vector<double> number_array(const json& value, const std::string& field) {
    if (!value.is_array()) throw SchemaError(field, "expected an array of numbers");
    std::vector<double> out;
    out.reserve(value.size());
    for (std::size_t i = 0; i < value.size(); ++i) out.push_back(number(value[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

Mechanism parse_mechanism(const json& value, const std::string& field, const SymbolTable& symbols) {
    if (!value.is_object()) throw SchemaError(field, "expected an object");
    const json& type = member(value, "type", field);
    if (!type.is_string()) throw SchemaError(field + ".type", "expected a string");
    const auto kind = type.get<std::string>();
    if (kind == "linear") {
        LinearRow row;
        row.coefficients = number_array(member(value, "coefficients", field), field + ".coefficients");
        if (auto it = value.find("offset"); it != value.end()) row.offset = number(*it, field + ".offset");
        if (auto it = value.find("noise_coefficient"); it != value.end())
            row.noise_coefficient = number(*it, field + ".noise_coefficient");
        return row;
    }
    if (kind == "expr") {
        const json& formula = member(value, "formula", field);
        if (!formula.is_string()) throw SchemaError(field + ".formula", "expected a string");
        try {
            return ExprMechanism{parse_expr(formula.get<std::string>(), symbols)};
        } catch (const ExprError& err) {
            throw SchemaError(field + ".formula", err.what());
        }
    }
    throw SchemaError(field + ".type", "unknown mechanism type '" + kind + "' (expected 'linear' or 'expr')");
}

}  // namespace

ScmModel parse_model(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& err) {
        const auto [line, column] = line_column(text, err.byte);
        throw ParseError("malformed model file: " + std::string(err.what()), line, column);
    }
    if (!doc.is_object()) throw SchemaError("<root>", "expected a JSON object");

    ScmModel model;
    const json& vars = member(doc, "variables", "<root>");
    if (!vars.is_array()) throw SchemaError("variables", "expected an array of strings");
    for (std::size_t i = 0; i < vars.size(); ++i) {
        if (!vars[i].is_string()) throw SchemaError("variables[" + std::to_string(i) + "]", "expected a string");
        model.endogenous_names.push_back(vars[i].get<std::string>());
    }
    const SymbolTable symbols = SymbolTable::for_variables(model.endogenous_names);

    const json& mechs = member(doc, "mechanisms", "<root>");
    if (!mechs.is_array()) throw SchemaError("mechanisms", "expected an array");
    if (mechs.size() != model.size())
        throw SchemaError("mechanisms", "mechanism count mismatch: " + std::to_string(mechs.size()) + " mechanisms for " +
                                            std::to_string(model.size()) + " variables");
    for (std::size_t i = 0; i < mechs.size(); ++i)
        model.mechanisms.push_back(parse_mechanism(mechs[i], "mechanisms[" + std::to_string(i) + "]", symbols));

    const json& noise = member(doc, "noise", "<root>");
    if (!noise.is_object()) throw SchemaError("noise", "expected an object");
    model.noise.means = number_array(member(noise, "means", "noise"), "noise.means");
    model.noise.variances = number_array(member(noise, "variances", "noise"), "noise.variances");

    const auto report = validate_model(model);
    if (!report.empty()) throw SchemaError("model", report.front().code + ": " + report.front().message);
    return model;
}

ScmModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open model file '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_model(buffer.str());
}

std::string serialize_model(const ScmModel& model) {
    ordered_json doc;
    doc["variables"] = model.endogenous_names;
    ordered_json mechs = ordered_json::array();
    for (const auto& mech : model.mechanisms) {
        ordered_json m;
        if (const auto* row = std::get_if<LinearRow>(&mech)) {
            m["type"] = "linear";
            m["coefficients"] = row->coefficients;
            m["offset"] = row->offset;
            m["noise_coefficient"] = row->noise_coefficient;
        } else {
            m["type"] = "expr";
            m["formula"] = to_formula(*std::get<ExprMechanism>(mech).root);
        }
        mechs.push_back(std::move(m));
    }
    doc["mechanisms"] = std::move(mechs);
    doc["noise"]["means"] = model.noise.means;
    doc["noise"]["variances"] = model.noise.variances;
    return doc.dump(2) + "\n";
}

void save_model(const ScmModel& model, const std::filesystem::path& path) {
    const std::string text = serialize_model(model);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write model file '" + path.string() + "'");
    out << text;
    if (!out) throw Error("failed writing model file '" + path.string() + "'");
}

std::string model_digest(const ScmModel& model) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : serialize_model(model)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace cyscm
