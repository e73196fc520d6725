#pragma once

#include <compare>
#include <optional>
#include <string>
#include <vector>

#include "fmcts/turn.hpp"

namespace fmcts {

enum class ElementKind : std::uint8_t { OffBoard, Empty, Friendly, Enemy, OwnedBy, ItemIndex };

/// What a pattern position must contain. Friendly/Enemy are relative to the
/// player to move; OwnedBy and ItemIndex carry an absolute player or piece index.
struct Element {
    ElementKind kind = ElementKind::Empty;
    int index = 0;

    friend auto operator<=>(const Element&, const Element&) = default;
};

struct Requirement {
    Walk walk;
    Element element;

    friend bool operator==(const Requirement&, const Requirement&) = default;
    friend std::strong_ordering operator<=>(const Requirement& a, const Requirement& b) {
        if (a.walk.size() != b.walk.size())
            return a.walk.size() <=> b.walk.size();
        if (auto c = a.walk <=> b.walk; c != 0)
            return c;
        return a.element <=> b.element;
    }
};

/// A local pattern plus the action it recommends. `from` is empty for
/// features that only constrain the destination of a move.
struct Feature {
    std::optional<Walk> from;
    Walk to;
    std::vector<Requirement> pattern;

    friend bool operator==(const Feature&, const Feature&) = default;
    friend std::strong_ordering operator<=>(const Feature& a, const Feature& b) {
        if (a.from.has_value() != b.from.has_value())
            return a.from.has_value() <=> b.from.has_value();
        if (a.from)
            if (auto c = *a.from <=> *b.from; c != 0)
                return c;
        if (auto c = a.to <=> b.to; c != 0)
            return c;
        return a.pattern <=> b.pattern;
    }
};

/// Sorts and deduplicates the pattern. Returns nullopt when one walk is
/// required to hold two different elements.
std::optional<Feature> normalized(Feature f);

std::string element_to_string(const Element& e);
std::string feature_to_string(const Feature& f);

} // namespace fmcts
