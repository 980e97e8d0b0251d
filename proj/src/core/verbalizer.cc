#include "core/verbalizer.h"

#include "core/error.h"

namespace entailre {
namespace {

std::string JoinTokens(const std::vector<std::string> &tokens,
                       std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (i != begin) out += ' ';
    out += tokens[i];
  }
  return out;
}

void ValidateSpan(const RelationExample &example, const TokenSpan &span,
                  const char *which) {
  if (!(span.start < span.end && span.end <= example.tokens.size())) {
    Fail(ErrorCode::kInvalidArgument,
         "example " + example.id + ": " + which + " span [" +
             std::to_string(span.start) + ", " + std::to_string(span.end) +
             ") is invalid for " + std::to_string(example.tokens.size()) +
             " tokens");
  }
}

}  // namespace

void ValidateExample(const RelationExample &example) {
  ValidateSpan(example, example.subj, "subject");
  ValidateSpan(example, example.obj, "object");
  if (example.subj.start < example.obj.end &&
      example.obj.start < example.subj.end) {
    Fail(ErrorCode::kInvalidArgument,
         "example " + example.id + ": subject and object spans overlap");
  }
}

std::string Verbalize(std::string_view pattern, std::string_view subj_text,
                      std::string_view obj_text) {
  ValidateTemplatePattern(pattern);
  if (subj_text.empty() || obj_text.empty()) {
    Fail(ErrorCode::kInvalidArgument, "mention text must be non-empty");
  }
  const std::size_t subj_at = pattern.find(kSubjectPlaceholder);
  const std::size_t obj_at = pattern.find(kObjectPlaceholder);

  std::string out;
  out.reserve(pattern.size() + subj_text.size() + obj_text.size());
  auto emit = [&](std::size_t first_at, std::size_t first_len,
                  std::string_view first_text, std::size_t second_at,
                  std::size_t second_len, std::string_view second_text) {
    out.append(pattern.substr(0, first_at));
    out.append(first_text);
    out.append(pattern.substr(first_at + first_len,
                              second_at - first_at - first_len));
    out.append(second_text);
    out.append(pattern.substr(second_at + second_len));
  };
  if (subj_at < obj_at) {
    emit(subj_at, kSubjectPlaceholder.size(), subj_text, obj_at,
         kObjectPlaceholder.size(), obj_text);
  } else {
    emit(obj_at, kObjectPlaceholder.size(), obj_text, subj_at,
         kSubjectPlaceholder.size(), subj_text);
  }
  return out;
}

std::string PremiseOf(const RelationExample &example) {
  return JoinTokens(example.tokens, 0, example.tokens.size());
}

std::string MentionText(const RelationExample &example, Argument which) {
  const TokenSpan &span =
      which == Argument::kSubject ? example.subj : example.obj;
  ValidateSpan(example, span,
               which == Argument::kSubject ? "subject" : "object");
  return JoinTokens(example.tokens, span.start, span.end);
}

std::vector<Hypothesis> HypothesesFor(const RelationExample &example,
                                      const RelationEntry &entry) {
  const std::string subj = MentionText(example, Argument::kSubject);
  const std::string obj = MentionText(example, Argument::kObject);
  std::vector<Hypothesis> out;
  out.reserve(entry.templates.size());
  for (const Template &t : entry.templates) {
    out.push_back(Hypothesis{Verbalize(t, subj, obj), entry.label, t.id});
  }
  return out;
}

}  // namespace entailre
