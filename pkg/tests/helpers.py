"""Independent oracles shared by routing/metrics/acceptance tests."""

from collections import deque


def bfs_distances(adjacency: dict[str, dict[str, str]], destination: str) -> dict[str, int]:
    distances = {destination: 0}
    queue = deque([destination])
    while queue:
        node = queue.popleft()
        for neighbor in adjacency[node]:
            if neighbor not in distances:
                distances[neighbor] = distances[node] + 1
                queue.append(neighbor)
    return distances


def bfs_path(adjacency: dict[str, dict[str, str]], source: str, destination: str) -> list[str]:
    """Min-hop path as link ids, breaking ties toward the smallest
    next-hop id at every step."""
    distances = bfs_distances(adjacency, destination)
    if source not in distances:
        return []
    links = []
    node = source
    while node != destination:
        node_next = min(n for n in adjacency[node] if distances.get(n) == distances[node] - 1)
        links.append(adjacency[node][node_next])
        node = node_next
    return links


def adjacency_of(scenario) -> dict[str, dict[str, str]]:
    adjacency: dict[str, dict[str, str]] = {n: {} for n in scenario.nodes}
    for link in scenario.links:
        adjacency[link.a][link.b] = link.id
        adjacency[link.b][link.a] = link.id
    return adjacency


def brute_force_loads(scenario, pairs=None) -> dict[str, int]:
    """Per-link ordered-pair share counts by direct path enumeration."""
    adjacency = adjacency_of(scenario)
    loads = {link.id: 0 for link in scenario.links}
    for source, destination in (pairs or scenario.ordered_pairs()):
        for link_id in bfs_path(adjacency, source, destination):
            loads[link_id] += 1
    return loads
