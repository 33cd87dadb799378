// Copyright (C) 2026 The fader Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <initializer_list>
#include <string>
#include <string_view>

#include <yaml-cpp/yaml.h>

#include "fader/errors.hpp"

namespace fader::bench::yaml {

inline int line(const YAML::Node& node) {
    const auto mark = node.Mark();
    return mark.line >= 0 ? mark.line + 1 : 0;
}

inline YAML::Node load(std::string_view text, std::string_view source) {
    try {
        return YAML::Load(std::string(text));
    } catch (const YAML::ParserException& e) {
        throw ParseError(std::string(source) + ": " + e.msg, e.mark.line + 1);
    }
}

template <typename T>
T as(const YAML::Node& node, const std::string& field) {
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        throw ParseError("cannot read value '" + (node.IsScalar() ? node.Scalar() : std::string("<non-scalar>")) + "'",
                         line(node), field);
    }
}

inline void require_map(const YAML::Node& node, const std::string& field) {
    if (!node.IsMap()) throw ParseError("expected a mapping", line(node), field);
}

inline YAML::Node required(const YAML::Node& node, const char* key, const std::string& field) {
    const YAML::Node child = node[key];
    if (!child) throw ParseError(std::string("missing key '") + key + "'", line(node), field);
    return child;
}

inline void reject_unknown(const YAML::Node& node, std::initializer_list<std::string_view> allowed,
                           const std::string& field) {
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        bool known = false;
        for (auto a : allowed) known = known || key == a;
        if (!known) throw ParseError("unknown key '" + key + "'", line(kv.first), field);
    }
}

inline void check_schema_version(const YAML::Node& root, int expected) {
    const auto v = required(root, "schema_version", "document");
    if (as<int>(v, "schema_version") != expected)
        throw ParseError("unsupported schema_version (expected " + std::to_string(expected) + ")", line(v),
                         "schema_version");
}

}  // namespace fader::bench::yaml
