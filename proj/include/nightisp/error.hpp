// Copyright 2026 The nightisp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nightisp {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or unsupported image container.
class DecodeError : public Error {
public:
    using Error::Error;
};

/// Missing or invalid sidecar field. `field()` names the offending key.
class SchemaError : public Error {
public:
    SchemaError(std::string field, const std::string& why)
        : Error("schema error in '" + field + "': " + why), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class DegenerateCalibration : public Error {
public:
    using Error::Error;
};

class DegenerateImage : public Error {
public:
    using Error::Error;
};

class KnotError : public Error {
public:
    using Error::Error;
};

/// Pipeline description problem, tagged with the offending stage index.
class SpecError : public Error {
public:
    enum class Kind { UnknownStage, BadParam, SpaceChain, Malformed };

    SpecError(Kind kind, std::size_t stageIndex, const std::string& what)
        : Error(what), kind_(kind), index_(stageIndex) {}

    Kind kind() const noexcept { return kind_; }
    std::size_t stageIndex() const noexcept { return index_; }

private:
    Kind kind_;
    std::size_t index_;
};

/// An exception escaping a pipeline stage, annotated with its position.
class StageError : public Error {
public:
    StageError(std::size_t stageIndex, const std::string& stageId, const std::string& what)
        : Error("stage " + std::to_string(stageIndex) + " (" + stageId + "): " + what),
          index_(stageIndex) {}

    std::size_t stageIndex() const noexcept { return index_; }

private:
    std::size_t index_;
};

class UnknownRendition : public Error {
public:
    using Error::Error;
};

class MissingTime : public Error {
public:
    using Error::Error;
};

class EmptyPool : public Error {
public:
    using Error::Error;
};

}  // namespace nightisp
