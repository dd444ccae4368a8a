#pragma once

#include <cstddef>
#include <vector>

namespace gsfl {

// N clients partitioned into M non-empty groups. Within each group, clients
// train in the listed order (relay order).
struct Topology {
    std::size_t n_clients = 0;
    std::size_t n_groups = 0;
    std::vector<std::size_t> assignment;           // client -> group
    std::vector<std::vector<std::size_t>> order;   // per-group ordered client list
};

// Contiguous blocks of ascending client ids, sizes as even as possible
// (the first n_clients % n_groups groups take one extra client).
Topology uniform_topology(std::size_t n_clients, std::size_t n_groups);

void validate_topology(const Topology& topo);

}  // namespace gsfl
