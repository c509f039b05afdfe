#pragma once

#include <cctype>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace synodiff {

// Error taxonomy. The CLI maps InputError -> exit 2 and ContractError -> exit 3.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Anything wrong with user-supplied resources or configuration.
struct InputError : Error {
  using Error::Error;
};
struct LoadError : InputError {
  using InputError::InputError;
};
struct ParseError : InputError {
  using InputError::InputError;
};
struct ConfigError : InputError {
  using InputError::InputError;
};
/// A lemma is missing from the synset database.
struct CoverageError : InputError {
  using InputError::InputError;
};

/// Word not present in a vector space.
struct LookupError : Error {
  using Error::Error;
};
/// Argument outside the mathematical domain of an operation.
struct DomainError : Error {
  using Error::Error;
};
struct NumericalError : Error {
  using Error::Error;
};
/// Training data with a single class.
struct DegenerateDataError : Error {
  using Error::Error;
};
/// Upstream artifacts disagree (e.g. feature schema vs. model schema).
struct ContractError : Error {
  using Error::Error;
};

enum class Label : std::uint8_t { Syn = 0, Diff = 1 };

inline std::string_view to_string(Label l) { return l == Label::Syn ? "Syn" : "Diff"; }

inline Label parse_label(std::string_view s) {
  if (s == "Syn") return Label::Syn;
  if (s == "Diff") return Label::Diff;
  throw ParseError("unknown label '" + std::string(s) + "'");
}

enum class Pos : std::uint8_t { ADJ, NN, VERB };

inline std::string_view to_string(Pos p) {
  switch (p) {
    case Pos::ADJ: return "ADJ";
    case Pos::NN: return "NN";
    case Pos::VERB: return "VERB";
  }
  return "?";
}

/// Accepts ADJ, NN, VERB in any case.
inline Pos parse_pos(std::string_view s) {
  std::string up(s);
  for (auto& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (up == "ADJ") return Pos::ADJ;
  if (up == "NN") return Pos::NN;
  if (up == "VERB") return Pos::VERB;
  throw ParseError("unknown POS tag '" + std::string(s) + "'");
}

}  // namespace synodiff
