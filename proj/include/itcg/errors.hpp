// Copyright 2026 The ITCG Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ITCG_ERRORS_HPP
#define ITCG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace itcg {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Range to target below the singularity guard.
class ZeroRange : public Error {
public:
    explicit ZeroRange(const std::string& where)
        : Error("zero range in " + where) {}
};

/// Lead angle on or beyond the FOV boundary where the saturation state is unbounded.
class ConstraintActive : public Error {
public:
    using Error::Error;
};

class NoConvergence : public Error {
public:
    NoConvergence(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

class SingularJacobian : public Error {
public:
    using Error::Error;
};

class IntegrationFailure : public Error {
public:
    IntegrationFailure(const std::string& what, double last_tau)
        : Error(what), last_tau_(last_tau) {}
    double last_tau() const { return last_tau_; }

private:
    double last_tau_;
};

class EmptyTrajectory : public Error {
public:
    using Error::Error;
};

class EmptySweep : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Parse failure; line is 0 when the problem is not tied to a line.
class Malformed : public Error {
public:
    Malformed(const std::string& what, std::size_t line = 0)
        : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class VersionMismatch : public Error {
public:
    using Error::Error;
};

class Diverged : public Error {
public:
    Diverged(const std::string& what, int epoch) : Error(what), epoch_(epoch) {}
    int epoch() const { return epoch_; }

private:
    int epoch_;
};

class InfeasibleQuery : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    ConfigError(const std::string& key, const std::string& what)
        : Error("config key '" + key + "': " + what), key_(key) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

class MissingArtifact : public Error {
public:
    using Error::Error;
};

}  // namespace itcg

#endif  // ITCG_ERRORS_HPP
