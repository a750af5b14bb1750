#pragma once

#include "supercrit/profile.hpp"

namespace supercrit {

/// u at time t with its spatial time-derivative u_t = Delta_h u + |u|^{p-1} u
/// (zero at the pinned far-field node).
struct EvolutionState {
    double t = 0.0;
    RadialProfile u;
    RadialProfile u_t;
};

} // namespace supercrit
