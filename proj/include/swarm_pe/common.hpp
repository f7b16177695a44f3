#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace swarm_pe {

// Coincidence / collinearity / degenerate-edge tolerance, in arena units.
inline constexpr double kGeomTol = 1e-9;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input lies outside the valid domain (point outside Q, N < 2, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Polygon with fewer than 3 effective vertices or vanishing area.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

// Two sites closer than the coincidence tolerance.
class CoincidentSitesError : public Error {
 public:
  using Error::Error;
};

// Queried cells do not share a Voronoi edge.
class NonNeighborError : public Error {
 public:
  using Error::Error;
};

// Gradient undefined because pursuer and evader coincide.
class SingularityError : public Error {
 public:
  using Error::Error;
};

// Normalizing a direction of length below tolerance.
class ZeroDirectionError : public Error {
 public:
  using Error::Error;
};

// Vector/matrix dimension mismatch.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Invalid or unknown configuration value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A game step was requested with a side already eliminated.
class EpisodeOverError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace swarm_pe
