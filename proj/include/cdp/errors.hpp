// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <stdexcept>
#include <string>

namespace cdp {

// Error taxonomy. The CLI maps these onto exit codes, so every throw site
// in the library picks the class by what the caller can do about it:
//   domain_error      invalid argument or precondition violation
//   config_error      malformed run configuration (schema, unknown keys)
//   data_error        unreadable or malformed input data
//   capability_error  a model/base combination the analytic paths do not serve
//   resource_error    a configured cap (partition count, matrix dimension) hit

class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class domain_error : public error {
 public:
  using error::error;
};

class config_error : public error {
 public:
  using error::error;
};

class data_error : public error {
 public:
  using error::error;
};

class capability_error : public error {
 public:
  using error::error;
};

class resource_error : public error {
 public:
  using error::error;
};

}  // namespace cdp
