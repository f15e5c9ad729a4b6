/* Copyright 2026 The stablab Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef STABLAB_ERRORS_HPP_
#define STABLAB_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace stablab {

// Every failure raised by the library derives from Error so that the C API
// can translate it into a status code in one place.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A documented precondition of a bound or checker does not hold, e.g. a step
// size above 2/L handed to the non-expansiveness checker.
class PreconditionViolation : public Error {
 public:
  using Error::Error;
};

// Enumeration guards and similar hard caps.
class ResourceLimit : public Error {
 public:
  using Error::Error;
};

class DegenerateData : public Error {
 public:
  using Error::Error;
};

// A file could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace stablab

#endif  // STABLAB_ERRORS_HPP_
