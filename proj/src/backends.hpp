#pragma once

#include <memory>

#include "upr/mip.hpp"

namespace upr {

std::unique_ptr<SolverBackend> make_bnb_backend();
#ifdef UPR_WITH_HIGHS
std::unique_ptr<SolverBackend> make_highs_backend();
#endif

}  // namespace upr
