/*
 * Copyright 2026 The ivim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace ivim {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Error tied to a location inside a document, e.g. "ccps[0].vms[1]".
class DocumentError : public Error {
public:
    DocumentError(std::string path, const std::string& message)
        : Error(path.empty() ? message : path + ": " + message), path_(std::move(path)), message_(message) {}

    const std::string& path() const noexcept { return path_; }
    const std::string& message() const noexcept { return message_; }

private:
    std::string path_;
    std::string message_;
};

/// Malformed document: wrong type, missing or unknown field, bad value.
class SchemaError : public DocumentError {
public:
    using DocumentError::DocumentError;
};

/// Structurally valid document whose ids are duplicated or dangling.
class IntegrityError : public DocumentError {
public:
    using DocumentError::DocumentError;
};

class UnsupportedKind : public Error {
public:
    using Error::Error;
};

/// A runtime overlay tried to introduce or replace a base constraint.
class OverlayError : public Error {
public:
    using Error::Error;
};

} // namespace ivim
