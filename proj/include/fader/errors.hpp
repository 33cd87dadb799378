// Copyright (C) 2026 The fader Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace fader {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define FADER_DEFINE_ERROR(Name)            \
    class Name : public Error {             \
    public:                                 \
        using Error::Error;                 \
    }

FADER_DEFINE_ERROR(InvalidScheduleParams);
FADER_DEFINE_ERROR(ShapeMismatch);
FADER_DEFINE_ERROR(DimMismatch);
FADER_DEFINE_ERROR(NonPositiveVariance);
FADER_DEFINE_ERROR(EmptyMixture);
FADER_DEFINE_ERROR(WeightsNotNormalized);
FADER_DEFINE_ERROR(UnknownCondition);
FADER_DEFINE_ERROR(DegenerateDirection);
FADER_DEFINE_ERROR(StepOutOfRange);
FADER_DEFINE_ERROR(ConfigError);
FADER_DEFINE_ERROR(ZeroVector);
FADER_DEFINE_ERROR(ValidationError);
FADER_DEFINE_ERROR(IoError);
FADER_DEFINE_ERROR(NonFiniteValue);

#undef FADER_DEFINE_ERROR

/// Malformed input file. Carries the 1-based line and the offending field when known.
class ParseError : public Error {
public:
    ParseError(const std::string& what, int line = 0, std::string field = {})
        : Error(format(what, line, field)), line_(line), field_(std::move(field)) {}

    int line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    static std::string format(const std::string& what, int line, const std::string& field) {
        std::string msg;
        if (line > 0) msg += "line " + std::to_string(line) + ": ";
        if (!field.empty()) msg += "field '" + field + "': ";
        return msg + what;
    }

    int line_;
    std::string field_;
};

}  // namespace fader
