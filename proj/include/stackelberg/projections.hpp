#pragma once

// Euclidean projections onto the convex sets used by the solvers.

#include <span>
#include <variant>

#include "stackelberg/types.hpp"

namespace stackelberg {

struct Box {
  Vec lo;
  Vec hi;
};

struct NonnegOrthant {
  Index dim = 0;
};

// { u : a^T u <= beta }
struct Halfspace {
  Vec a;
  double beta = 0.0;
};

// { u : G u <= h }
struct Polyhedron {
  Mat G;
  Vec h;
};

// Convexified complementarity set around an anchor nu_bar = col(lambda_bar, mu_bar):
//   { nu = col(lambda, mu) >= 0 : 0.5 ||lambda + mu||^2 - nu_bar^T nu + 0.5 ||nu_bar||^2 <= theta }.
// The left-hand side equals lambda^T mu + 0.5 ||nu - nu_bar||^2, which is how it is evaluated.
struct QuadSublevel {
  Vec anchor;
  double theta = 0.0;
};

using ConvexSetDescriptor = std::variant<Box, NonnegOrthant, Halfspace, Polyhedron, QuadSublevel>;

struct DykstraOptions {
  double tol = 1e-10;
  int max_iter = 10000;
};

Index dimension(const ConvexSetDescriptor& set);

// Throws PreconditionError when the descriptor breaks its own invariants.
void validate(const ConvexSetDescriptor& set);

// Largest constraint violation of u (0 when u is in the set).
double violation(const ConvexSetDescriptor& set, const Vec& u);

// Left-hand side of the QuadSublevel constraint.
double quad_sublevel_value(const Vec& anchor, const Vec& nu);

Vec project(const ConvexSetDescriptor& set, const Vec& v, const DykstraOptions& options = {});

// Projection onto the intersection of the sets (Dykstra's algorithm).
Vec dykstra(std::span<const ConvexSetDescriptor> sets, const Vec& v,
            const DykstraOptions& options = {});

// Exact projection onto { lo <= u <= hi, a^T u <= beta } by bisection on the
// halfspace multiplier.
Vec project_box_halfspace(const Vec& lo, const Vec& hi, const Vec& a, double beta, const Vec& v);

}  // namespace stackelberg
