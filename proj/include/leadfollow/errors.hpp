#pragma once

#include <stdexcept>
#include <string>

namespace leadfollow {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define LEADFOLLOW_DEFINE_ERROR(Name)                 \
  class Name : public Error {                         \
   public:                                            \
    explicit Name(const std::string& what)            \
        : Error(std::string(#Name ": ") + what) {}    \
  }

// perception / sim-core
LEADFOLLOW_DEFINE_ERROR(NoVisibleLeader);
LEADFOLLOW_DEFINE_ERROR(NotVisible);
LEADFOLLOW_DEFINE_ERROR(EmptyBuffers);
LEADFOLLOW_DEFINE_ERROR(NumericalFailure);

// costmap-graph
LEADFOLLOW_DEFINE_ERROR(NoPath);
LEADFOLLOW_DEFINE_ERROR(DegenerateGeometry);

// traj-opt
LEADFOLLOW_DEFINE_ERROR(Infeasible);

// adaptation
LEADFOLLOW_DEFINE_ERROR(LeaderInsideMap);
LEADFOLLOW_DEFINE_ERROR(NoFreeArc);
LEADFOLLOW_DEFINE_ERROR(NeverSeen);

// harness
LEADFOLLOW_DEFINE_ERROR(ConfigError);
LEADFOLLOW_DEFINE_ERROR(IoError);

#undef LEADFOLLOW_DEFINE_ERROR

}  // namespace leadfollow
