#pragma once

#include <stdexcept>
#include <string>

namespace statfig {

/// Base for all library errors; `code()` is a stable machine-readable tag.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

// metadata parsing / validation
struct MalformedDocument : Error {
  explicit MalformedDocument(const std::string& detail)
      : Error("MalformedDocument", "malformed metadata document: " + detail) {}
};

struct MissingField : Error {
  explicit MissingField(const std::string& field)
      : Error("MissingField", "missing required field: " + field), field(field) {}
  std::string field;
};

struct DuplicateSubchartIndex : Error {
  explicit DuplicateSubchartIndex(int index)
      : Error("DuplicateSubchartIndex",
              "duplicate subchart index: " + std::to_string(index)),
        index(index) {}
  int index;
};

// prompt rendering
struct MissingBinding : Error {
  explicit MissingBinding(const std::string& name)
      : Error("MissingBinding", "missing prompt binding: " + name), name(name) {}
  std::string name;
};

// gateway
struct TransportError : Error {
  TransportError(const std::string& detail, int attempts)
      : Error("Transport", "transport failure after " + std::to_string(attempts) +
                               " attempt(s): " + detail),
        attempts(attempts) {}
  int attempts;
};

struct NoScriptEntry : Error {
  explicit NoScriptEntry(const std::string& fingerprint)
      : Error("NoScriptEntry", "no mock script entry for fingerprint " + fingerprint),
        fingerprint(fingerprint) {}
  std::string fingerprint;
};

struct AuthMissing : Error {
  explicit AuthMissing(const std::string& env_var)
      : Error("AuthMissing", "credential environment variable not set: " + env_var),
        env_var(env_var) {}
  std::string env_var;
};

// metadata generation stage
struct AllBackendsFailed : Error {
  AllBackendsFailed() : Error("AllBackendsFailed", "every generator call failed") {}
};

struct NoViableCandidate : Error {
  NoViableCandidate()
      : Error("NoViableCandidate", "no candidate produced a parseable document") {}
};

// chart compilation / layout
struct UnrenderableKind : Error {
  explicit UnrenderableKind(const std::string& raw)
      : Error("UnrenderableKind", "cannot render unknown chart kind: \"" + raw + "\"") {}
};

struct EmptySeries : Error {
  explicit EmptySeries(int subchart_index)
      : Error("EmptySeries", "subchart " + std::to_string(subchart_index) +
                                 " has no numeric series") {}
};

struct InfeasibleLayout : Error {
  explicit InfeasibleLayout(const std::string& detail)
      : Error("InfeasibleLayout", "layout infeasible: " + detail) {}
};

// curation
struct LeakCheckExhausted : Error {
  explicit LeakCheckExhausted(const std::string& record_id)
      : Error("LeakCheckExhausted",
              "text synthesis kept leaking for record " + record_id),
        record_id(record_id) {}
  std::string record_id;
};

struct SchemaVersionMismatch : Error {
  SchemaVersionMismatch(int found, int expected)
      : Error("SchemaVersionMismatch",
              "review file schema_version " + std::to_string(found) +
                  ", expected " + std::to_string(expected)) {}
};

struct InvalidEditedMetadata : Error {
  InvalidEditedMetadata(const std::string& record_id, const std::string& detail)
      : Error("InvalidEditedMetadata",
              "record " + record_id + ": " + detail),
        record_id(record_id) {}
  std::string record_id;
};

// configuration
struct ConfigError : Error {
  explicit ConfigError(const std::string& detail)
      : Error("ConfigError", "config: " + detail) {}
};

}  // namespace statfig
