#pragma once

#include <string>

#include <rapidjson/document.h>
#include <rapidjson/error/en.h>
#include <rapidjson/schema.h>
#include <rapidjson/stringbuffer.h>

#include "experiment_schema.hpp"
#include "saddlejet/error.hpp"
#include "saddlejet/io.hpp"

namespace saddlejet::cli {

using io::json;

inline const json& schema_json()
{
    static const json s = json::parse(kExperimentSchema);
    return s;
}

/// Checks a config document against the experiment schema; unknown keys fail.
inline void validate_config_text(const std::string& text)
{
    rapidjson::Document sd;
    sd.Parse(kExperimentSchema);
    require(!sd.HasParseError(), ErrorKind::Validation, "embedded experiment schema is malformed");
    const rapidjson::SchemaDocument schema(sd);

    rapidjson::Document d;
    d.Parse(text.c_str());
    if (d.HasParseError()) {
        fail(ErrorKind::Validation, std::string("config is not valid JSON: ") + rapidjson::GetParseError_En(d.GetParseError())
                                        + " at offset " + std::to_string(d.GetErrorOffset()));
    }
    rapidjson::SchemaValidator v(schema);
    if (!d.Accept(v)) {
        rapidjson::StringBuffer where, rule;
        v.GetInvalidDocumentPointer().StringifyUriFragment(where);
        v.GetInvalidSchemaPointer().StringifyUriFragment(rule);
        fail(ErrorKind::Validation, std::string("config violates the schema at '") + where.GetString() + "' (rule '"
                                        + v.GetInvalidSchemaKeyword() + "' at " + rule.GetString() + ")");
    }
}

namespace detail {

inline void fill_defaults(json& cfg, const json& node)
{
    if (!node.contains("properties")) {
        return;
    }
    for (const auto& [key, prop] : node["properties"].items()) {
        if (!cfg.contains(key) && prop.contains("default")) {
            cfg[key] = prop["default"];
        }
        if (cfg.contains(key) && cfg[key].is_object()) {
            fill_defaults(cfg[key], prop);
        }
    }
}

} // namespace detail

/// Validated config with every schema default filled in.
inline json load_config_text(const std::string& text)
{
    validate_config_text(text);
    json cfg = json::parse(text);
    detail::fill_defaults(cfg, schema_json());
    return cfg;
}

inline json load_config_file(const std::string& path) { return load_config_text(io::read_text(path)); }

inline json default_config() { return load_config_text("{}"); }

/// Process exit status for an error kind: 2 for bad input, 3 for numerical failure.
inline int exit_code(ErrorKind k)
{
    switch (k) {
    case ErrorKind::Validation:
    case ErrorKind::Precondition:
    case ErrorKind::Ingestion:
    case ErrorKind::GridMismatch:
    case ErrorKind::Io: return 2;
    default: return 3;
    }
}

inline std::string error_json(std::string_view kind, const std::string& message)
{
    return json{{"error", {{"kind", kind}, {"message", message}}}}.dump();
}

} // namespace saddlejet::cli
