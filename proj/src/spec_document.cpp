#include "polymag/spec_document.hpp"

#include "polymag/errors.hpp"
#include "polymag/expression.hpp"
#include "polymag/jump_kernels.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

namespace polymag {

namespace {

struct Line {
    int number = 0;
    int column0 = 0;  ///< offset of text within the raw line
    std::string text;
};

bool is_space(char c) { return c == ' ' || c == '\t'; }

Line trimmed(int number, std::string_view raw) {
    const std::size_t hash = raw.find('#');
    if (hash != std::string_view::npos) raw = raw.substr(0, hash);
    std::size_t b = 0;
    while (b < raw.size() && is_space(raw[b])) ++b;
    std::size_t e = raw.size();
    while (e > b && is_space(raw[e - 1])) --e;
    return {number, static_cast<int>(b), std::string(raw.substr(b, e - b))};
}

[[noreturn]] void fail(const Line& line, std::size_t at, const std::string& msg) {
    throw SpecError(msg, line.number, line.column0 + static_cast<int>(at) + 1);
}

std::string trim(std::string_view s) {
    std::size_t b = 0;
    while (b < s.size() && is_space(s[b])) ++b;
    std::size_t e = s.size();
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

int parse_int(const Line& line, std::size_t at, std::string_view s, const char* what) {
    const std::string t = trim(s);
    int v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
        fail(line, at, std::string("expected an integer for ") + what + ", got '" + t + "'");
    }
    return v;
}

// "key: value" split; `at` receives the offset of the value.
std::pair<std::string, std::size_t> split_entry(const Line& line) {
    const std::size_t colon = line.text.find(':');
    if (colon == std::string::npos) fail(line, 0, "expected 'key: expression'");
    return {trim(std::string_view(line.text).substr(0, colon)), colon + 1};
}

StateSpace parse_state_space(const Line& line, std::size_t at, const std::string& value, std::size_t d) {
    std::istringstream in(value);
    std::string kind;
    in >> kind;
    std::vector<std::string> args;
    for (std::string a; in >> a;) args.push_back(a);
    if (kind == "real" && args.empty()) return StateSpace::real();
    if (kind == "positive" && args.size() == 1) {
        const int p = parse_int(line, at, args[0], "state_space positive p");
        if (p < 0 || static_cast<std::size_t>(p) > d) fail(line, at, "state_space positive p needs 0 <= p <= d");
        return StateSpace::positive(static_cast<std::size_t>(p));
    }
    if (kind == "box" && args.size() == 2) {
        const double lo = parse_constant(args[0], line.number, line.column0 + static_cast<int>(at));
        const double hi = parse_constant(args[1], line.number, line.column0 + static_cast<int>(at));
        if (!(lo < hi)) fail(line, at, "state_space box needs l < u");
        return StateSpace::box(lo, hi);
    }
    fail(line, at, "state_space must be 'real', 'positive p' or 'box l u'");
}

bool parse_bool(const Line& line, std::size_t at, const std::string& v) {
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    fail(line, at, "expected true or false, got '" + v + "'");
}

const std::vector<std::string> kSections = {"meta", "drift", "diffusion", "jump_moments", "sampler"};

}  // namespace

ProcessSpec parse_spec(std::string_view text) {
    std::map<std::string, std::vector<Line>> sections;
    std::map<std::string, int> seen;
    std::string current;
    int number = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view raw = text.substr(start, end - start);
        if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
        start = end + 1;
        ++number;
        const Line line = trimmed(number, raw);
        if (line.text.empty()) continue;
        if (line.text.front() == '[') {
            if (line.text.back() != ']') fail(line, 0, "malformed section header");
            const std::string name = trim(std::string_view(line.text).substr(1, line.text.size() - 2));
            if (std::find(kSections.begin(), kSections.end(), name) == kSections.end()) {
                fail(line, 1, "unknown section '" + name + "'");
            }
            if (seen.contains(name)) fail(line, 1, "section '" + name + "' repeated (first at line " + std::to_string(seen[name]) + ")");
            seen[name] = number;
            current = name;
            sections[name];
            continue;
        }
        if (current.empty()) fail(line, 0, "content before the first section header");
        sections[current].push_back(line);
    }

    std::size_t d = 1;
    int m = 2;
    double horizon = 1.0;
    std::string name;
    bool check_degrees = true;
    std::optional<std::pair<Line, std::string>> state_line;
    std::map<std::string, int> meta_seen;
    for (const Line& line : sections["meta"]) {
        const std::size_t eq = line.text.find('=');
        if (eq == std::string::npos) fail(line, 0, "expected 'key = value'");
        const std::string key = trim(std::string_view(line.text).substr(0, eq));
        const std::string value = trim(std::string_view(line.text).substr(eq + 1));
        std::size_t at = eq + 1;
        while (at < line.text.size() && is_space(line.text[at])) ++at;
        if (meta_seen.contains(key)) fail(line, 0, "meta key '" + key + "' repeated");
        meta_seen[key] = line.number;
        if (key == "d") {
            const int v = parse_int(line, at, value, "d");
            if (v < 1 || v > 16) fail(line, at, "d must lie in [1, 16]");
            d = static_cast<std::size_t>(v);
        } else if (key == "m") {
            m = parse_int(line, at, value, "m");
            if (m < 2 || m > kMaxDegree || m % 2) fail(line, at, "m must be even and lie in [2, " + std::to_string(kMaxDegree) + "]");
        } else if (key == "T") {
            horizon = parse_constant(value, line.number, line.column0 + static_cast<int>(at));
            if (!(horizon > 0.0)) fail(line, at, "T must be positive");
        } else if (key == "name") {
            name = value;
        } else if (key == "state_space") {
            state_line = std::make_pair(line, value);
        } else if (key == "check_degrees") {
            check_degrees = parse_bool(line, at, value);
        } else {
            fail(line, 0, "unknown meta key '" + key + "'");
        }
    }

    ProcessSpec spec = ProcessSpec::zero(d, m, horizon);
    spec.name = name;
    if (state_line) {
        const Line& line = state_line->first;
        spec.state_space = parse_state_space(line, line.text.find('=') + 1, state_line->second, d);
    }

    auto expression = [&](const Line& line, std::size_t at) {
        return parse_expression(std::string_view(line.text).substr(at), d, line.number, line.column0 + static_cast<int>(at));
    };
    auto bounded = [&](const Line& line, const TimePolynomial& p, int bound, const std::string& what) {
        if (p.degree() > bound && check_degrees) {
            fail(line, 0, what + " has degree " + std::to_string(p.degree()) + " in x; at most " + std::to_string(bound) + " is allowed");
        }
        return p.on_degree(std::max(bound, p.degree()));
    };

    std::vector<bool> drift_seen(d, false);
    for (const Line& line : sections["drift"]) {
        const auto [key, at] = split_entry(line);
        const int i = parse_int(line, 0, key, "the drift component");
        if (i < 1 || static_cast<std::size_t>(i) > d) fail(line, 0, "drift component must lie in [1, " + std::to_string(d) + "]");
        if (drift_seen[static_cast<std::size_t>(i - 1)]) fail(line, 0, "drift component " + key + " repeated");
        drift_seen[static_cast<std::size_t>(i - 1)] = true;
        spec.drift[static_cast<std::size_t>(i - 1)] = bounded(line, expression(line, at), 1, "drift " + key);
    }

    std::vector<bool> diff_seen(d * d, false);
    for (const Line& line : sections["diffusion"]) {
        const auto [key, at] = split_entry(line);
        int i = 0;
        int j = 0;
        const std::size_t comma = key.find(',');
        if (comma != std::string::npos) {
            i = parse_int(line, 0, std::string_view(key).substr(0, comma), "the diffusion row");
            j = parse_int(line, 0, std::string_view(key).substr(comma + 1), "the diffusion column");
        } else if (key.size() == 2 && d < 10) {
            i = parse_int(line, 0, key.substr(0, 1), "the diffusion row");
            j = parse_int(line, 0, key.substr(1, 1), "the diffusion column");
        } else {
            fail(line, 0, "diffusion key must be 'i,j' (or 'ij' when d < 10)");
        }
        if (i < 1 || j < 1 || static_cast<std::size_t>(i) > d || static_cast<std::size_t>(j) > d) {
            fail(line, 0, "diffusion index out of range");
        }
        if (i > j) fail(line, 0, "diffusion entries are given on the upper triangle (i <= j)");
        const std::size_t slot = static_cast<std::size_t>(i - 1) * d + static_cast<std::size_t>(j - 1);
        if (diff_seen[slot]) fail(line, 0, "diffusion entry " + key + " repeated");
        diff_seen[slot] = true;
        spec.set_diffusion(static_cast<std::size_t>(i - 1), static_cast<std::size_t>(j - 1),
                           bounded(line, expression(line, at), 2, "diffusion " + key));
    }

    for (const Line& line : sections["jump_moments"]) {
        const auto [key, at] = split_entry(line);
        if (key.size() < 2 || key.front() != '(' || key.back() != ')') fail(line, 0, "jump moment key must look like (l1,...,ld)");
        std::vector<int> exps;
        std::string_view inner = std::string_view(key).substr(1, key.size() - 2);
        for (std::size_t pos = 0;;) {
            const std::size_t comma = inner.find(',', pos);
            const int v = parse_int(line, 0, inner.substr(pos, comma == std::string_view::npos ? inner.size() - pos : comma - pos),
                                    "a jump moment exponent");
            if (v < 0) fail(line, 0, "jump moment exponents must be non-negative");
            exps.push_back(v);
            if (comma == std::string_view::npos) break;
            pos = comma + 1;
        }
        if (exps.size() != d) fail(line, 0, "jump moment key needs " + std::to_string(d) + " exponents");
        const MultiIndex l(exps);
        if (l.degree() < 2 || l.degree() > m) {
            fail(line, 0, "jump moment order |l| = " + std::to_string(l.degree()) + " must lie in [2, m]");
        }
        if (spec.jump_moments.contains(l)) fail(line, 0, "jump moment " + key + " repeated");
        const TimePolynomial p = bounded(line, expression(line, at), l.degree(), "jump moment " + key);
        if (!p.is_zero()) spec.jump_moments.emplace(l, p);
    }

    std::vector<SamplerPtr> kernels;
    for (const Line& line : sections["sampler"]) {
        std::istringstream in(line.text);
        std::string kernel;
        in >> kernel;
        std::map<std::string, double> params;
        for (std::string tok; in >> tok;) {
            const std::size_t eq = tok.find('=');
            const std::size_t at = line.text.find(tok);
            if (eq == std::string::npos || eq == 0) fail(line, at, "sampler parameters are written key=value");
            params[tok.substr(0, eq)] = parse_constant(tok.substr(eq + 1), line.number, line.column0 + static_cast<int>(at + eq + 1));
        }
        try {
            kernels.push_back(make_sampler(kernel, params));
        } catch (const std::invalid_argument& e) {
            fail(line, 0, e.what());
        }
    }
    if (!kernels.empty()) {
        if (d != 1) throw SpecError("the built-in jump samplers are one-dimensional", seen["sampler"], 1);
        spec.jump_sampler = kernels.size() == 1 ? kernels.front() : std::make_shared<KernelMixture>(kernels);
    }

    spec.validate(check_degrees);
    return spec;
}

std::string serialize_spec(const ProcessSpec& spec) {
    std::ostringstream out;
    out << "[meta]\n";
    if (!spec.name.empty()) out << "name = " << spec.name << "\n";
    out << "d = " << spec.d << "\n";
    out << "m = " << spec.m << "\n";
    out << "T = " << format_number(spec.horizon) << "\n";
    out << "state_space = " << spec.state_space.to_string() << "\n";
    if (!spec.violations(true).empty() && spec.violations(false).empty()) out << "check_degrees = false\n";

    out << "\n[drift]\n";
    for (std::size_t i = 0; i < spec.d; ++i) {
        if (!spec.drift[i].is_zero()) out << i + 1 << ": " << spec.drift[i].to_string() << "\n";
    }
    out << "\n[diffusion]\n";
    for (std::size_t i = 0; i < spec.d; ++i) {
        for (std::size_t j = i; j < spec.d; ++j) {
            if (!spec.c(i, j).is_zero()) out << i + 1 << "," << j + 1 << ": " << spec.c(i, j).to_string() << "\n";
        }
    }
    if (!spec.jump_moments.empty()) {
        out << "\n[jump_moments]\n";
        for (const auto& [l, p] : spec.jump_moments) out << "(" << l.to_string() << "): " << p.to_string() << "\n";
    }
    if (spec.jump_sampler) {
        out << "\n[sampler]\n";
        for (const auto& line : spec.jump_sampler->describe()) out << line << "\n";
    }
    return out.str();
}

ProcessSpec load_spec_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SpecError("cannot read spec file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_spec(buf.str());
}

}  // namespace polymag
