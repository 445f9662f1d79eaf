#include "agentsim/graph.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

namespace agentsim {

PortGraph::PortGraph(std::vector<std::vector<PortEntry>> adjacency)
{
    offsets_.reserve(adjacency.size() + 1);
    offsets_.push_back(0);
    for (auto &row : adjacency) {
        entries_.insert(entries_.end(), row.begin(), row.end());
        offsets_.push_back(entries_.size());
    }
}

std::optional<Port> PortGraph::port_to(NodeId v, NodeId u) const noexcept
{
    const auto row = ports(v);
    for (std::size_t p = 0; p < row.size(); ++p)
        if (row[p].neighbor == u)
            return static_cast<Port>(p);
    return std::nullopt;
}

Port PortGraph::max_degree() const noexcept
{
    Port best = 0;
    for (NodeId v = 0; v < node_count(); ++v)
        best = std::max(best, degree(v));
    return best;
}

std::vector<Edge> PortGraph::edges() const
{
    std::vector<Edge> out;
    for (NodeId v = 0; v < node_count(); ++v)
        for (Port p = 0; p < degree(v); ++p) {
            const auto &e = at(v, p);
            if (v < e.neighbor)
                out.push_back({v, p, e.neighbor, e.reverse});
        }
    return out;
}

std::string ValidityReport::summary() const
{
    if (ok())
        return "ok";
    std::ostringstream os;
    for (std::size_t i = 0; i < violations.size(); ++i) {
        if (i)
            os << "; ";
        os << violations[i].message;
    }
    return os.str();
}

ValidityReport validate(const PortGraph &g)
{
    ValidityReport rep;
    const std::size_t n = g.node_count();
    auto add = [&](std::string msg, std::optional<NodeId> v = {}, std::optional<Port> p = {}) {
        rep.violations.push_back({std::move(msg), v, p});
    };
    if (n == 0) {
        add("empty graph");
        return rep;
    }
    for (NodeId v = 0; v < n; ++v) {
        std::set<NodeId> seen;
        for (Port p = 0; p < g.degree(v); ++p) {
            const auto &e = g.at(v, p);
            const std::string where = " at node " + std::to_string(v) + " port " + std::to_string(p);
            if (e.neighbor >= n) {
                add("neighbor out of range" + where, v, p);
                continue;
            }
            if (e.neighbor == v)
                add("self-loop at node " + std::to_string(v), v, p);
            if (!seen.insert(e.neighbor).second)
                add("parallel edge" + where, v, p);
            if (e.reverse < 0 || e.reverse >= g.degree(e.neighbor)) {
                add("reverse port out of range" + where, v, p);
                continue;
            }
            const auto &back = g.at(e.neighbor, e.reverse);
            if (back.neighbor != v || back.reverse != p)
                add("port symmetry broken" + where, v, p);
        }
    }
    if (!rep.ok())
        return rep;

    std::vector<bool> reached(n, false);
    std::vector<NodeId> stack{0};
    reached[0] = true;
    std::size_t count = 1;
    while (!stack.empty()) {
        const NodeId v = stack.back();
        stack.pop_back();
        for (const auto &e : g.ports(v))
            if (!reached[e.neighbor]) {
                reached[e.neighbor] = true;
                ++count;
                stack.push_back(e.neighbor);
            }
    }
    if (count != n)
        add("disconnected");
    return rep;
}

PortGraph canonical_graph(std::size_t n, std::span<const std::pair<NodeId, NodeId>> edges)
{
    std::vector<std::vector<NodeId>> nbrs(n);
    std::set<std::pair<NodeId, NodeId>> seen;
    for (auto [a, b] : edges) {
        if (a >= n || b >= n)
            throw std::invalid_argument("edge endpoint out of range");
        if (a == b)
            throw std::invalid_argument("self-loop at node " + std::to_string(a));
        if (!seen.insert(std::minmax(a, b)).second)
            throw std::invalid_argument("parallel edge");
        nbrs[a].push_back(b);
        nbrs[b].push_back(a);
    }
    for (auto &row : nbrs)
        std::sort(row.begin(), row.end());
    std::vector<std::vector<PortEntry>> adj(n);
    for (NodeId v = 0; v < n; ++v)
        for (NodeId u : nbrs[v]) {
            const auto rank = std::lower_bound(nbrs[u].begin(), nbrs[u].end(), v) - nbrs[u].begin();
            adj[v].push_back({u, static_cast<Port>(rank)});
        }
    return PortGraph(std::move(adj));
}

PortGraph shuffle_ports(const PortGraph &g, std::uint64_t seed)
{
    const std::size_t n = g.node_count();
    std::mt19937_64 rng(seed);
    // newport[v][old] = new port number
    std::vector<std::vector<Port>> newport(n);
    for (NodeId v = 0; v < n; ++v) {
        newport[v].resize(static_cast<std::size_t>(g.degree(v)));
        std::iota(newport[v].begin(), newport[v].end(), 0);
        std::shuffle(newport[v].begin(), newport[v].end(), rng);
    }
    std::vector<std::vector<PortEntry>> adj(n);
    for (NodeId v = 0; v < n; ++v) {
        adj[v].resize(static_cast<std::size_t>(g.degree(v)));
        for (Port p = 0; p < g.degree(v); ++p) {
            const auto &e = g.at(v, p);
            adj[v][static_cast<std::size_t>(newport[v][static_cast<std::size_t>(p)])] = {
                e.neighbor, newport[e.neighbor][static_cast<std::size_t>(e.reverse)]};
        }
    }
    return PortGraph(std::move(adj));
}

PortGraph relabel(const PortGraph &g, std::span<const NodeId> perm)
{
    const std::size_t n = g.node_count();
    if (perm.size() != n)
        throw std::invalid_argument("permutation size mismatch");
    std::vector<std::vector<PortEntry>> adj(n);
    for (NodeId v = 0; v < n; ++v) {
        auto &row = adj[perm[v]];
        for (const auto &e : g.ports(v))
            row.push_back({perm[e.neighbor], e.reverse});
    }
    return PortGraph(std::move(adj));
}

namespace {

using EdgeList = std::vector<std::pair<NodeId, NodeId>>;

EdgeList random_tree_edges(std::size_t n, std::size_t cap, std::mt19937_64 &rng)
{
    EdgeList edges;
    std::vector<std::size_t> deg(n, 0);
    std::vector<NodeId> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<NodeId> open{order[0]};
    for (std::size_t i = 1; i < n; ++i) {
        if (open.empty())
            throw InfeasibleSpec("degree cap too small for a spanning tree");
        std::uniform_int_distribution<std::size_t> pick(0, open.size() - 1);
        const std::size_t k = pick(rng);
        const NodeId parent = open[k];
        const NodeId child = order[i];
        edges.emplace_back(parent, child);
        if (++deg[parent] >= cap) {
            open[k] = open.back();
            open.pop_back();
        }
        if (++deg[child] < cap)
            open.push_back(child);
    }
    return edges;
}

} // namespace

PortGraph generate(const GraphFamilySpec &spec)
{
    const std::size_t n = spec.n;
    if (n == 0)
        throw InfeasibleSpec("node count must be at least 1");
    const std::size_t cap = spec.max_degree.value_or(n > 1 ? n - 1 : 0);
    EdgeList edges;
    bool random = false;
    switch (spec.family) {
    case Family::Path:
        if (n > 2 && cap < 2)
            throw InfeasibleSpec("path needs degree cap >= 2");
        for (NodeId v = 0; v + 1 < n; ++v)
            edges.emplace_back(v, v + 1);
        break;
    case Family::Cycle:
        if (n < 3)
            throw InfeasibleSpec("cycle needs at least 3 nodes");
        if (cap < 2)
            throw InfeasibleSpec("cycle needs degree cap >= 2");
        for (NodeId v = 0; v < n; ++v)
            edges.emplace_back(v, static_cast<NodeId>((v + 1) % n));
        break;
    case Family::Star:
        if (n > 1 && cap < n - 1)
            throw InfeasibleSpec("star needs degree cap >= n-1");
        for (NodeId v = 1; v < n; ++v)
            edges.emplace_back(0, v);
        break;
    case Family::Complete:
        if (n > 1 && cap < n - 1)
            throw InfeasibleSpec("complete graph needs degree cap >= n-1");
        for (NodeId u = 0; u < n; ++u)
            for (NodeId v = u + 1; v < n; ++v)
                edges.emplace_back(u, v);
        break;
    case Family::RandomTree:
    case Family::RandomConnected: {
        random = true;
        if (n > 1 && cap == 0)
            throw InfeasibleSpec("degree cap 0 with more than one node");
        if (n > 2 && cap < 2)
            throw InfeasibleSpec("degree cap 1 cannot connect more than two nodes");
        std::mt19937_64 rng(spec.seed);
        edges = random_tree_edges(n, std::max<std::size_t>(cap, 1), rng);
        if (spec.family == Family::RandomConnected && n > 2) {
            std::vector<std::size_t> deg(n, 0);
            std::set<std::pair<NodeId, NodeId>> have;
            for (auto [a, b] : edges) {
                ++deg[a];
                ++deg[b];
                have.insert(std::minmax(a, b));
            }
            std::uniform_int_distribution<std::size_t> extra_count(0, n);
            std::uniform_int_distribution<NodeId> node(0, static_cast<NodeId>(n - 1));
            const std::size_t extra = extra_count(rng);
            for (std::size_t tries = 0, added = 0; added < extra && tries < 20 * n; ++tries) {
                const NodeId a = node(rng), b = node(rng);
                if (a == b || deg[a] >= cap || deg[b] >= cap || !have.insert(std::minmax(a, b)).second)
                    continue;
                edges.emplace_back(a, b);
                ++deg[a];
                ++deg[b];
                ++added;
            }
        }
        break;
    }
    }
    PortGraph g = canonical_graph(n, edges);
    if (random)
        g = shuffle_ports(g, spec.seed ^ 0x9e3779b97f4a7c15ULL);
    return g;
}

Family parse_family(const std::string &name)
{
    static const std::map<std::string, Family> table{
        {"path", Family::Path},           {"cycle", Family::Cycle},
        {"star", Family::Star},           {"complete", Family::Complete},
        {"random-tree", Family::RandomTree}, {"random-connected", Family::RandomConnected},
    };
    const auto it = table.find(name);
    if (it == table.end())
        throw std::invalid_argument("unknown graph family: " + name);
    return it->second;
}

std::string family_name(Family f)
{
    switch (f) {
    case Family::Path: return "path";
    case Family::Cycle: return "cycle";
    case Family::Star: return "star";
    case Family::Complete: return "complete";
    case Family::RandomTree: return "random-tree";
    case Family::RandomConnected: return "random-connected";
    }
    return "?";
}

PortGraph read_pg(std::istream &in)
{
    std::string line;
    std::size_t lineno = 0;
    auto next_line = [&]() -> std::istringstream {
        if (!std::getline(in, line))
            throw GraphParseError(lineno + 1, "unexpected end of file");
        ++lineno;
        return std::istringstream(line);
    };
    auto expect_end = [&](std::istringstream &ls) {
        std::string extra;
        if (ls >> extra)
            throw GraphParseError(lineno, "trailing token '" + extra + "'");
    };

    {
        auto ls = next_line();
        std::string magic;
        int version = 0;
        if (!(ls >> magic >> version) || magic != "pg" || version != 1)
            throw GraphParseError(lineno, "expected header 'pg 1'");
        expect_end(ls);
    }
    long long n = 0, m = 0;
    {
        auto ls = next_line();
        if (!(ls >> n >> m) || n < 1 || m < 0)
            throw GraphParseError(lineno, "expected '<n> <m>' with n >= 1");
        expect_end(ls);
    }
    std::vector<std::vector<std::optional<PortEntry>>> slots(static_cast<std::size_t>(n));
    std::vector<Edge> edges;
    for (long long i = 0; i < m; ++i) {
        auto ls = next_line();
        long long u, pu, v, pv;
        if (!(ls >> u >> pu >> v >> pv))
            throw GraphParseError(lineno, "expected '<u> <pu> <v> <pv>'");
        expect_end(ls);
        if (u < 0 || v < 0 || u >= n || v >= n)
            throw GraphParseError(lineno, "node id out of range");
        if (u >= v)
            throw GraphParseError(lineno, "edge lines need u < v");
        if (pu < 0 || pv < 0 || pu >= n || pv >= n)
            throw GraphParseError(lineno, "port out of range");
        edges.push_back({static_cast<NodeId>(u), static_cast<Port>(pu), static_cast<NodeId>(v), static_cast<Port>(pv)});
    }
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") != std::string::npos)
            throw GraphParseError(lineno, "content after the last edge");
    }
    for (const auto &e : edges) {
        for (auto [a, pa, b, pb] : {std::tuple{e.u, e.pu, e.v, e.pv}, std::tuple{e.v, e.pv, e.u, e.pu}}) {
            auto &row = slots[a];
            if (row.size() <= static_cast<std::size_t>(pa))
                row.resize(static_cast<std::size_t>(pa) + 1);
            if (row[static_cast<std::size_t>(pa)])
                throw std::invalid_argument("duplicate port " + std::to_string(pa) + " at node " + std::to_string(a));
            row[static_cast<std::size_t>(pa)] = PortEntry{b, pb};
        }
    }
    std::vector<std::vector<PortEntry>> adj(static_cast<std::size_t>(n));
    for (std::size_t v = 0; v < adj.size(); ++v)
        for (std::size_t p = 0; p < slots[v].size(); ++p) {
            if (!slots[v][p])
                throw std::invalid_argument("port " + std::to_string(p) + " unused at node " + std::to_string(v));
            adj[v].push_back(*slots[v][p]);
        }
    PortGraph g(std::move(adj));
    const auto rep = validate(g);
    if (!rep.ok())
        throw std::invalid_argument("invalid graph: " + rep.summary());
    return g;
}

void write_pg(std::ostream &out, const PortGraph &g)
{
    const auto es = g.edges();
    out << "pg 1\n" << g.node_count() << ' ' << es.size() << '\n';
    for (const auto &e : es)
        out << e.u << ' ' << e.pu << ' ' << e.v << ' ' << e.pv << '\n';
}

PortGraph load_graph(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());
    return read_pg(in);
}

void save_graph(const std::filesystem::path &path, const PortGraph &g)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    write_pg(out, g);
}

std::vector<PortGraph> connected_graphs(std::size_t n, bool up_to_isomorphism)
{
    if (n == 0 || n > 7)
        throw std::invalid_argument("connected_graphs supports 1 <= n <= 7");
    std::vector<std::pair<NodeId, NodeId>> pairs;
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v = u + 1; v < n; ++v)
            pairs.emplace_back(u, v);
    const std::size_t k = pairs.size();
    std::vector<std::vector<std::size_t>> index(n, std::vector<std::size_t>(n));
    for (std::size_t i = 0; i < k; ++i) {
        index[pairs[i].first][pairs[i].second] = i;
        index[pairs[i].second][pairs[i].first] = i;
    }

    auto connected = [&](std::uint64_t mask) {
        std::uint32_t seen = 1, frontier = 1;
        while (frontier) {
            std::uint32_t next = 0;
            for (std::size_t i = 0; i < k; ++i)
                if (mask >> i & 1) {
                    const auto [a, b] = pairs[i];
                    if ((frontier >> a & 1) && !(seen >> b & 1))
                        next |= 1u << b;
                    if ((frontier >> b & 1) && !(seen >> a & 1))
                        next |= 1u << a;
                }
            seen |= next;
            frontier = next;
        }
        return seen == (1u << n) - 1;
    };

    std::vector<std::vector<std::size_t>> perm_maps;
    if (up_to_isomorphism) {
        std::vector<NodeId> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        do {
            std::vector<std::size_t> map(k);
            for (std::size_t i = 0; i < k; ++i)
                map[i] = index[perm[pairs[i].first]][perm[pairs[i].second]];
            perm_maps.push_back(std::move(map));
        } while (std::next_permutation(perm.begin(), perm.end()));
    }

    std::vector<PortGraph> out;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
        if (!connected(mask))
            continue;
        if (up_to_isomorphism) {
            bool minimal = true;
            for (const auto &map : perm_maps) {
                std::uint64_t img = 0;
                for (std::size_t i = 0; i < k; ++i)
                    if (mask >> i & 1)
                        img |= std::uint64_t{1} << map[i];
                if (img < mask) {
                    minimal = false;
                    break;
                }
            }
            if (!minimal)
                continue;
        }
        std::vector<std::pair<NodeId, NodeId>> es;
        for (std::size_t i = 0; i < k; ++i)
            if (mask >> i & 1)
                es.push_back(pairs[i]);
        out.push_back(canonical_graph(n, es));
    }
    return out;
}

} // namespace agentsim
