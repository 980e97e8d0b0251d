#include "core/schema.h"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "core/error.h"

namespace entailre {
namespace {

std::size_t CountOccurrences(std::string_view text, std::string_view needle) {
  std::size_t count = 0;
  for (std::size_t pos = text.find(needle); pos != std::string_view::npos;
       pos = text.find(needle, pos + needle.size())) {
    ++count;
  }
  return count;
}

std::string LineContext(const YAML::Node &node, std::string_view source) {
  std::ostringstream out;
  out << source;
  const YAML::Mark mark = node.Mark();
  if (!mark.is_null()) out << ":" << mark.line + 1;
  return out.str();
}

[[noreturn]] void ParseFail(std::string_view source, const YAML::Node &node,
                            const std::string &message) {
  Fail(ErrorCode::kParse, LineContext(node, source) + ": " + message);
}

std::string ScalarOf(const YAML::Node &node, std::string_view source,
                     const std::string &what) {
  if (!node.IsScalar()) ParseFail(source, node, what + " must be a string");
  return node.Scalar();
}

std::vector<std::string> StringList(const YAML::Node &node,
                                    std::string_view source,
                                    const std::string &what) {
  if (!node.IsSequence()) ParseFail(source, node, what + " must be a list");
  std::vector<std::string> out;
  for (const YAML::Node &item : node) {
    out.push_back(ScalarOf(item, source, what + " entry"));
  }
  return out;
}

void ValidateEntry(const RelationEntry &entry) {
  if (entry.label.empty()) {
    Fail(ErrorCode::kInvalidArgument, "relation label must be non-empty");
  }
  if (entry.templates.empty() ||
      entry.templates.size() > kMaxTemplatesPerRelation) {
    Fail(ErrorCode::kInvalidArgument,
         "relation " + entry.label + ": expected 1-" +
             std::to_string(kMaxTemplatesPerRelation) + " templates, got " +
             std::to_string(entry.templates.size()));
  }
  for (const Template &t : entry.templates) {
    try {
      ValidateTemplatePattern(t.pattern);
    } catch (const Error &e) {
      Fail(ErrorCode::kInvalidArgument,
           "relation " + entry.label + ", template " + std::to_string(t.id) +
               ": " + e.what());
    }
  }
  if (entry.subj_types.empty()) {
    Fail(ErrorCode::kInvalidArgument,
         "relation " + entry.label + ": subj_types is empty");
  }
  if (entry.obj_types.empty()) {
    Fail(ErrorCode::kInvalidArgument,
         "relation " + entry.label + ": obj_types is empty");
  }
}

std::vector<Template> NumberTemplates(const std::vector<std::string> &patterns) {
  std::vector<Template> out;
  out.reserve(patterns.size());
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    out.push_back(Template{patterns[i], i});
  }
  return out;
}

}  // namespace

void ValidateTemplatePattern(std::string_view pattern) {
  const std::size_t subj = CountOccurrences(pattern, kSubjectPlaceholder);
  const std::size_t obj = CountOccurrences(pattern, kObjectPlaceholder);
  if (subj != 1 || obj != 1) {
    Fail(ErrorCode::kInvalidArgument,
         "template \"" + std::string(pattern) + "\" must contain " +
             std::string(kSubjectPlaceholder) + " and " +
             std::string(kObjectPlaceholder) + " exactly once (found " +
             std::to_string(subj) + " and " + std::to_string(obj) + ")");
  }
  if (pattern.size() ==
      kSubjectPlaceholder.size() + kObjectPlaceholder.size()) {
    Fail(ErrorCode::kInvalidArgument,
         "template \"" + std::string(pattern) +
             "\" has no text besides its placeholders");
  }
}

RelationSchema::RelationSchema(RelationMap relations,
                               std::string negative_label,
                               std::optional<Template> norel_template)
    : relations_(std::move(relations)),
      negative_label_(std::move(negative_label)),
      norel_template_(std::move(norel_template)) {
  if (negative_label_.empty()) {
    Fail(ErrorCode::kInvalidArgument, "negative_label must be non-empty");
  }
  if (relations_.count(negative_label_) != 0) {
    Fail(ErrorCode::kInvalidArgument,
         "negative_label " + negative_label_ + " is also a relation label");
  }
  for (const auto &[label, entry] : relations_) {
    if (label != entry.label) {
      Fail(ErrorCode::kInternal,
           "relation key " + label + " does not match entry " + entry.label);
    }
    ValidateEntry(entry);
  }
  if (norel_template_) {
    try {
      ValidateTemplatePattern(norel_template_->pattern);
    } catch (const Error &e) {
      Fail(ErrorCode::kInvalidArgument,
           std::string("norel_template: ") + e.what());
    }
  }
}

bool RelationSchema::Contains(std::string_view label) const {
  return relations_.find(label) != relations_.end();
}

const RelationEntry &RelationSchema::relation(std::string_view label) const {
  auto it = relations_.find(label);
  if (it == relations_.end()) {
    Fail(ErrorCode::kNotFound, "unknown relation " + std::string(label));
  }
  return it->second;
}

bool RelationSchema::Delta(std::string_view label, std::string_view subj_type,
                           std::string_view obj_type) const {
  const RelationEntry &entry = relation(label);
  return entry.subj_types.count(std::string(subj_type)) != 0 &&
         entry.obj_types.count(std::string(obj_type)) != 0;
}

std::vector<std::string> RelationSchema::CandidateRelations(
    std::string_view subj_type, std::string_view obj_type) const {
  std::vector<std::string> out;
  for (const auto &[label, entry] : relations_) {
    if (Delta(label, subj_type, obj_type)) out.push_back(label);
  }
  return out;
}

RelationSchema RelationSchema::WithTemplates(
    std::string_view label, const std::vector<std::string> &patterns) const {
  RelationMap relations = relations_;
  auto it = relations.find(label);
  if (it == relations.end()) {
    Fail(ErrorCode::kNotFound, "unknown relation " + std::string(label));
  }
  it->second.templates = NumberTemplates(patterns);
  return RelationSchema(std::move(relations), negative_label_,
                        norel_template_);
}

RelationSchema ParseSchema(std::string_view text, std::string_view source) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception &e) {
    Fail(ErrorCode::kParse, std::string(source) + ":" +
                                std::to_string(e.mark.line + 1) + ": " +
                                e.msg);
  }
  if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  if (!root.IsMap()) ParseFail(source, root, "schema must be a mapping");

  std::string negative_label = "no_relation";
  std::optional<Template> norel_template;
  RelationMap relations;

  for (const auto &kv : root) {
    const std::string key = ScalarOf(kv.first, source, "top-level key");
    if (key == "negative_label") {
      negative_label = ScalarOf(kv.second, source, "negative_label");
    } else if (key == "norel_template") {
      if (!kv.second.IsNull()) {
        norel_template =
            Template{ScalarOf(kv.second, source, "norel_template"), 0};
      }
    } else if (key == "relations") {
      if (kv.second.IsNull()) continue;
      if (!kv.second.IsMap()) {
        ParseFail(source, kv.second, "relations must be a mapping");
      }
      for (const auto &rel : kv.second) {
        const std::string label = ScalarOf(rel.first, source, "relation label");
        if (relations.count(label) != 0) {
          ParseFail(source, rel.first, "duplicate relation " + label);
        }
        if (!rel.second.IsMap()) {
          ParseFail(source, rel.second,
                    "relation " + label + " must be a mapping");
        }
        RelationEntry entry;
        entry.label = label;
        bool saw_templates = false;
        for (const auto &field : rel.second) {
          const std::string name = ScalarOf(field.first, source, "field name");
          if (name == "templates") {
            saw_templates = true;
            entry.templates = NumberTemplates(
                StringList(field.second, source, label + " templates"));
          } else if (name == "subj_types") {
            for (auto &t : StringList(field.second, source, label + " subj_types")) {
              entry.subj_types.insert(std::move(t));
            }
          } else if (name == "obj_types") {
            for (auto &t : StringList(field.second, source, label + " obj_types")) {
              entry.obj_types.insert(std::move(t));
            }
          } else {
            ParseFail(source, field.first,
                      "relation " + label + ": unknown field " + name);
          }
        }
        if (!saw_templates) {
          ParseFail(source, rel.first, "relation " + label + ": no templates");
        }
        try {
          ValidateEntry(entry);
        } catch (const Error &e) {
          ParseFail(source, rel.first, e.what());
        }
        relations.emplace(label, std::move(entry));
      }
    } else {
      ParseFail(source, kv.first, "unknown top-level key " + key);
    }
  }

  try {
    return RelationSchema(std::move(relations), std::move(negative_label),
                          std::move(norel_template));
  } catch (const Error &e) {
    Fail(ErrorCode::kParse, std::string(source) + ": " + e.what());
  }
}

RelationSchema LoadSchema(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open schema file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return ParseSchema(buffer.str(), path.string());
}

std::string SerializeSchema(const RelationSchema &schema) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "negative_label" << YAML::Value
      << schema.negative_label();
  if (schema.norel_template()) {
    out << YAML::Key << "norel_template" << YAML::Value << YAML::DoubleQuoted
        << schema.norel_template()->pattern;
  }
  out << YAML::Key << "relations" << YAML::Value;
  if (schema.relations().empty()) {
    out << YAML::Flow << YAML::BeginMap << YAML::EndMap;
  } else {
    out << YAML::BeginMap;
    for (const auto &[label, entry] : schema.relations()) {
      out << YAML::Key << label << YAML::Value << YAML::BeginMap;
      out << YAML::Key << "templates" << YAML::Value << YAML::BeginSeq;
      for (const Template &t : entry.templates) {
        out << YAML::DoubleQuoted << t.pattern;
      }
      out << YAML::EndSeq;
      out << YAML::Key << "subj_types" << YAML::Value << YAML::Flow
          << YAML::BeginSeq;
      for (const std::string &t : entry.subj_types) out << t;
      out << YAML::EndSeq;
      out << YAML::Key << "obj_types" << YAML::Value << YAML::Flow
          << YAML::BeginSeq;
      for (const std::string &t : entry.obj_types) out << t;
      out << YAML::EndSeq;
      out << YAML::EndMap;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

void SaveSchemaAtomic(const RelationSchema &schema,
                      const std::filesystem::path &path) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) Fail(ErrorCode::kIo, "cannot write " + tmp.string());
    out << SerializeSchema(schema);
    out.flush();
    if (!out) Fail(ErrorCode::kIo, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    Fail(ErrorCode::kIo,
         "cannot rename " + tmp.string() + " to " + path.string() + ": " +
             ec.message());
  }
}

}  // namespace entailre
