#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "core/schema.h"

namespace entailre {

// Half-open token interval [start, end).
struct TokenSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  bool operator==(const TokenSpan &) const = default;
};

// One sentence with an ordered (subject, object) mention pair. Swapping the
// two mentions describes a different example.
struct RelationExample {
  std::string id;
  std::vector<std::string> tokens;
  TokenSpan subj;
  TokenSpan obj;
  std::string subj_type;
  std::string obj_type;
  std::optional<std::string> gold;

  bool operator==(const RelationExample &) const = default;
};

enum class Argument { kSubject, kObject };

// Throws Error(kInvalidArgument) on empty or out-of-range spans and on
// overlapping subject/object spans.
void ValidateExample(const RelationExample &example);

struct Hypothesis {
  std::string text;
  std::string relation;
  std::size_t template_id = 0;
};

// Substitutes the mentions into the placeholders of `pattern`. Mentions are
// inserted verbatim and never rescanned for placeholders.
std::string Verbalize(std::string_view pattern, std::string_view subj_text,
                      std::string_view obj_text);

inline std::string Verbalize(const Template &t, std::string_view subj_text,
                             std::string_view obj_text) {
  return Verbalize(t.pattern, subj_text, obj_text);
}

// Single-space join of all tokens.
std::string PremiseOf(const RelationExample &example);

std::string MentionText(const RelationExample &example, Argument which);

// One hypothesis per template of `entry`, in template order.
std::vector<Hypothesis> HypothesesFor(const RelationExample &example,
                                      const RelationEntry &entry);

}  // namespace entailre
