#pragma once

#include <cctype>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "wgsv/common.hpp"
#include "wgsv/weighted_graph.hpp"

namespace wgsv {

/// Parses an angle literal: a real number ("0.7", "-1.2e-3") or a rational
/// multiple of pi ("pi", "-pi/8", "3pi/4", "3*pi/4", "pi/2").
inline double parse_angle(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    if (s.empty()) throw input_error("empty angle literal");

    auto pos = s.find("pi");
    if (pos == std::string::npos) {
        std::size_t used = 0;
        double v;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            throw input_error("bad angle literal '" + text + "'");
        }
        if (used != s.size()) throw input_error("bad angle literal '" + text + "'");
        return v;
    }

    std::string head = s.substr(0, pos);
    std::string tail = s.substr(pos + 2);
    double num = 1.0;
    if (!head.empty() && head.back() == '*') head.pop_back();
    if (head == "-") {
        num = -1.0;
    } else if (head == "+" || head.empty()) {
        num = 1.0;
    } else {
        std::size_t used = 0;
        try {
            num = std::stod(head, &used);
        } catch (const std::exception&) {
            throw input_error("bad angle literal '" + text + "'");
        }
        if (used != head.size()) throw input_error("bad angle literal '" + text + "'");
    }
    double den = 1.0;
    if (!tail.empty()) {
        if (tail[0] != '/') throw input_error("bad angle literal '" + text + "'");
        std::string d = tail.substr(1);
        std::size_t used = 0;
        try {
            den = std::stod(d, &used);
        } catch (const std::exception&) {
            throw input_error("bad angle literal '" + text + "'");
        }
        if (used != d.size() || den == 0.0)
            throw input_error("bad angle literal '" + text + "'");
    }
    return num * pi / den;
}

/// Graph file grammar (one directive per line, '#' starts a comment):
///   n <vertex count>
///   edge <j> <k> <theta>
/// Vertices are 1-based; theta accepts the parse_angle grammar. Duplicate
/// edges are rejected.
inline WeightedGraph parse_graph(std::istream& in) {
    std::string line;
    int lineno = 0;
    int n = -1;
    std::vector<std::tuple<int, int, double>> edges;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ls(line);
        std::string word;
        if (!(ls >> word)) continue;
        if (word == "n") {
            if (n != -1) throw input_error("line " + std::to_string(lineno) + ": duplicate n");
            if (!(ls >> n) || n <= 0)
                throw input_error("line " + std::to_string(lineno) + ": bad vertex count");
        } else if (word == "edge") {
            int j, k;
            std::string theta;
            if (!(ls >> j >> k >> theta))
                throw input_error("line " + std::to_string(lineno) + ": bad edge directive");
            std::string extra;
            if (ls >> extra)
                throw input_error("line " + std::to_string(lineno) + ": trailing tokens");
            edges.emplace_back(j, k, parse_angle(theta));
        } else {
            throw input_error("line " + std::to_string(lineno) + ": unknown directive '" +
                              word + "'");
        }
    }
    if (n == -1) throw input_error("graph file missing 'n' directive");
    WeightedGraph g(n);
    for (auto& [j, k, theta] : edges) g.add_edge(j, k, theta);
    return g;
}

inline WeightedGraph load_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open graph file '" + path + "'");
    return parse_graph(in);
}

/// Cover text form: parts separated by ';', vertices by ','. "1,3;2" means
/// A_1 = {1,3}, A_2 = {2}.
inline IndependenceCover parse_cover(const std::string& text) {
    IndependenceCover cover;
    std::istringstream ps(text);
    std::string part;
    while (std::getline(ps, part, ';')) {
        std::vector<int> vs;
        if (!part.empty() && part.back() == ',')
            throw input_error("bad cover literal '" + text + "'");
        std::istringstream vs_in(part);
        std::string tok;
        while (std::getline(vs_in, tok, ',')) {
            std::istringstream ts(tok);
            int v;
            std::string extra;
            if (!(ts >> v) || (ts >> extra))
                throw input_error("bad cover literal '" + text + "'");
            vs.push_back(v);
        }
        if (vs.empty()) throw input_error("empty part in cover literal '" + text + "'");
        cover.parts.push_back(std::move(vs));
    }
    if (cover.parts.empty()) throw input_error("empty cover literal");
    return cover;
}

inline std::string format_cover(const IndependenceCover& cover) {
    std::string out;
    for (std::size_t l = 0; l < cover.parts.size(); ++l) {
        if (l) out += ';';
        for (std::size_t i = 0; i < cover.parts[l].size(); ++i) {
            if (i) out += ',';
            out += std::to_string(cover.parts[l][i]);
        }
    }
    return out;
}

}  // namespace wgsv
