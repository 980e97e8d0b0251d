#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace entailre {

inline constexpr std::string_view kSubjectPlaceholder = "{subj}";
inline constexpr std::string_view kObjectPlaceholder = "{obj}";
inline constexpr std::size_t kMaxTemplatesPerRelation = 8;

// A verbalization pattern. `id` is the template's position within its
// relation and stays stable across load/serialize cycles.
struct Template {
  std::string pattern;
  std::size_t id = 0;

  bool operator==(const Template &) const = default;
};

// Throws Error(kInvalidArgument) unless `pattern` holds each placeholder
// exactly once and something else besides.
void ValidateTemplatePattern(std::string_view pattern);

struct RelationEntry {
  std::string label;
  std::vector<Template> templates;
  std::set<std::string> subj_types;
  std::set<std::string> obj_types;

  bool operator==(const RelationEntry &) const = default;
};

using RelationMap = std::map<std::string, RelationEntry, std::less<>>;

// Immutable after construction. Relations are keyed (and therefore ordered)
// lexicographically by label.
class RelationSchema {
 public:
  RelationSchema() = default;
  RelationSchema(RelationMap relations,
                 std::string negative_label,
                 std::optional<Template> norel_template);

  const RelationMap &relations() const {
    return relations_;
  }
  const std::string &negative_label() const { return negative_label_; }
  const std::optional<Template> &norel_template() const {
    return norel_template_;
  }

  bool Contains(std::string_view label) const;

  // Throws Error(kNotFound) for unknown labels.
  const RelationEntry &relation(std::string_view label) const;

  // Type gate: true iff subj_type is allowed as first argument and obj_type
  // as second argument of `label`.
  bool Delta(std::string_view label, std::string_view subj_type,
             std::string_view obj_type) const;

  // Labels whose type gate admits the pair, in lexicographic order.
  std::vector<std::string> CandidateRelations(std::string_view subj_type,
                                              std::string_view obj_type) const;

  // Copy of this schema with the template list of `label` replaced.
  RelationSchema WithTemplates(std::string_view label,
                               const std::vector<std::string> &patterns) const;

  bool operator==(const RelationSchema &) const = default;

 private:
  RelationMap relations_;
  std::string negative_label_ = "no_relation";
  std::optional<Template> norel_template_;
};

// Parses the YAML schema document. `source` names the input in messages.
RelationSchema ParseSchema(std::string_view text,
                           std::string_view source = "<schema>");
RelationSchema LoadSchema(const std::filesystem::path &path);

std::string SerializeSchema(const RelationSchema &schema);

// Writes to a sibling temporary file and renames it over `path`.
void SaveSchemaAtomic(const RelationSchema &schema,
                      const std::filesystem::path &path);

}  // namespace entailre
