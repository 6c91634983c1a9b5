#pragma once

#include "cmclab/grid.hpp"

#include <random>

namespace testutil {

inline cmclab::CellSet random_set(const cmclab::GridPtr& grid, std::mt19937_64& rng, double density = 0.5)
{
    std::bernoulli_distribution coin(density);
    std::vector<bool> bits(grid->cell_count());
    for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = coin(rng);
    return cmclab::CellSet(grid, std::move(bits));
}

} // namespace testutil
