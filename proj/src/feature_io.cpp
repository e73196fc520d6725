#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fmcts/features.hpp"

namespace fmcts {

FeatureFileError::FeatureFileError(int line, int column, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
      line_(line), column_(column) {}

namespace {

std::string format_weight(double w) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, w);
    return std::string(buf, ptr);
}

class LineParser {
public:
    LineParser(std::string_view line, int number) : s_(line), line_(number) {}

    [[noreturn]] void fail(const std::string& what) const {
        throw FeatureFileError(line_, static_cast<int>(pos_) + 1, what);
    }

    void expect(std::string_view lit) {
        if (s_.substr(pos_, lit.size()) != lit)
            fail("expected '" + std::string(lit) + "'");
        pos_ += lit.size();
    }

    bool consume(char c) {
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    bool done() const { return pos_ >= s_.size(); }

    std::int64_t integer() {
        std::int64_t v = 0;
        auto [ptr, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
        if (ec != std::errc() || v < 0)
            fail("expected a non-negative integer");
        pos_ = static_cast<std::size_t>(ptr - s_.data());
        return v;
    }

    double weight() {
        double v = 0;
        auto [ptr, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
        if (ec != std::errc() || !std::isfinite(v))
            fail("expected a finite decimal weight");
        pos_ = static_cast<std::size_t>(ptr - s_.data());
        return v;
    }

    Turn turn() {
        const std::int64_t num = integer();
        if (!consume('/')) {
            if (num != 0)
                fail("turn must be 0 or p/q");
            return Turn{};
        }
        const std::int64_t den = integer();
        if (den == 0 || num >= den)
            fail("turn p/q must satisfy 0 <= p < q");
        return Turn(num, den);
    }

    Walk walk() {
        Walk w;
        expect("[");
        if (consume(']'))
            return w;
        do {
            w.push_back(turn());
        } while (consume(';'));
        expect("]");
        return w;
    }

    Element element() {
        static constexpr std::pair<std::string_view, ElementKind> plain[] = {
            {"off", ElementKind::OffBoard}, {"empty", ElementKind::Empty},
            {"friend", ElementKind::Friendly}, {"enemy", ElementKind::Enemy}};
        for (auto [name, kind] : plain) {
            if (s_.substr(pos_, name.size()) == name) {
                pos_ += name.size();
                return {kind, 0};
            }
        }
        if (s_.substr(pos_, 3) == "own") {
            pos_ += 3;
            return {ElementKind::OwnedBy, static_cast<int>(integer())};
        }
        if (s_.substr(pos_, 4) == "item") {
            pos_ += 4;
            return {ElementKind::ItemIndex, static_cast<int>(integer())};
        }
        fail("unknown element (expected off, empty, friend, enemy, own<N> or item<N>)");
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;
    int line_;
};

} // namespace

std::string serialize_features(const FeatureSet& fs, std::span<const double> weights) {
    if (weights.size() != fs.size())
        throw std::invalid_argument("weight vector length does not match the feature set");
    std::string out;
    for (std::size_t i = 0; i < fs.size(); ++i) {
        const Feature& f = fs[i];
        out += "w=" + format_weight(weights[i]);
        out += "\tfrom=" + (f.from ? walk_to_string(*f.from) : std::string("-"));
        out += "\tto=" + walk_to_string(f.to);
        out += "\tpat=";
        for (std::size_t r = 0; r < f.pattern.size(); ++r) {
            if (r)
                out += ',';
            out += element_to_string(f.pattern[r].element) + "@" + walk_to_string(f.pattern[r].walk);
        }
        out += '\n';
    }
    return out;
}

WeightedFeatures parse_feature_set(std::string_view text) {
    WeightedFeatures out;
    int number = 0;
    while (!text.empty()) {
        ++number;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        if (line.empty() || line.front() == '#')
            continue;

        LineParser p(line, number);
        Feature f;
        p.expect("w=");
        const double w = p.weight();
        p.expect("\tfrom=");
        if (!p.consume('-'))
            f.from = p.walk();
        p.expect("\tto=");
        f.to = p.walk();
        p.expect("\tpat=");
        if (!p.done()) {
            do {
                Element e = p.element();
                p.expect("@");
                f.pattern.push_back({p.walk(), e});
            } while (p.consume(','));
        }
        if (!p.done())
            p.fail("unexpected trailing characters");
        auto n = normalized(f);
        if (!n)
            throw FeatureFileError(number, 1, "pattern requires two different elements on one walk");
        if (!out.features.append(*n))
            throw FeatureFileError(number, 1, "duplicate feature");
        out.weights.push_back(w);
    }
    return out;
}

WeightedFeatures read_feature_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open feature file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_feature_set(buf.str());
}

void write_feature_file(const std::string& path, const FeatureSet& fs, std::span<const double> weights) {
    const std::string text = serialize_features(fs, weights);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot write feature file " + path);
    out << text;
    if (!out)
        throw std::runtime_error("failed writing feature file " + path);
}

WeightedFeatures handcrafted_yavalath() {
    // o o + o   completes four in a row
    // o o +     completes three (loss)
    // o + o     completes three (loss)
    return parse_feature_set("w=3000\tfrom=-\tto=[]\tpat=friend@[0],friend@[0;0],friend@[1/2]\n"
                             "w=-1000\tfrom=-\tto=[]\tpat=friend@[0],friend@[0;0]\n"
                             "w=-1000\tfrom=-\tto=[]\tpat=friend@[0],friend@[1/2]\n");
}

} // namespace fmcts
