#include "gsfl/topology.hpp"

#include <string>

#include "gsfl/errors.hpp"

namespace gsfl {

Topology uniform_topology(std::size_t n_clients, std::size_t n_groups) {
    if (n_clients == 0 || n_groups == 0) {
        throw ConfigError("topology needs at least one client and one group");
    }
    if (n_groups > n_clients) {
        throw ConfigError("n_groups " + std::to_string(n_groups) + " exceeds n_clients " +
                          std::to_string(n_clients));
    }
    Topology topo;
    topo.n_clients = n_clients;
    topo.n_groups = n_groups;
    topo.assignment.resize(n_clients);
    topo.order.resize(n_groups);
    const std::size_t base = n_clients / n_groups;
    const std::size_t extra = n_clients % n_groups;
    std::size_t client = 0;
    for (std::size_t g = 0; g < n_groups; ++g) {
        const std::size_t size = base + (g < extra ? 1 : 0);
        for (std::size_t i = 0; i < size; ++i, ++client) {
            topo.assignment[client] = g;
            topo.order[g].push_back(client);
        }
    }
    return topo;
}

void validate_topology(const Topology& topo) {
    if (topo.n_groups == 0 || topo.n_clients == 0 || topo.n_groups > topo.n_clients) {
        throw ConfigError("invalid topology sizes");
    }
    if (topo.assignment.size() != topo.n_clients || topo.order.size() != topo.n_groups) {
        throw ConfigError("topology arrays do not match declared sizes");
    }
    std::vector<bool> seen(topo.n_clients, false);
    for (std::size_t g = 0; g < topo.n_groups; ++g) {
        if (topo.order[g].empty()) throw ConfigError("group " + std::to_string(g) + " is empty");
        for (std::size_t client : topo.order[g]) {
            if (client >= topo.n_clients || seen[client] || topo.assignment[client] != g) {
                throw ConfigError("client " + std::to_string(client) +
                                  " is not assigned to exactly one group");
            }
            seen[client] = true;
        }
    }
    for (std::size_t c = 0; c < topo.n_clients; ++c) {
        if (!seen[c]) throw ConfigError("client " + std::to_string(c) + " belongs to no group");
    }
}

}  // namespace gsfl
