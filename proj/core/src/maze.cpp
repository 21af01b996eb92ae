#include "ibp/maze.hpp"

#include <deque>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ibp {

const char* maze_action_name(MazeAction a) {
    switch (a) {
        case MazeAction::Up: return "up";
        case MazeAction::Down: return "down";
        case MazeAction::Left: return "left";
        case MazeAction::Right: return "right";
    }
    return "?";
}

namespace {
Cell moved(Cell c, MazeAction a) {
    switch (a) {
        case MazeAction::Up: return {c.row - 1, c.col};
        case MazeAction::Down: return {c.row + 1, c.col};
        case MazeAction::Left: return {c.row, c.col - 1};
        case MazeAction::Right: return {c.row, c.col + 1};
    }
    return c;
}

[[noreturn]] void parse_error(int line, int col, const std::string& what) {
    throw std::invalid_argument("parse_maze: line " + std::to_string(line + 1) + ", column " +
                                std::to_string(col + 1) + ": " + what);
}
}  // namespace

Maze parse_maze(const std::string& text) {
    std::vector<std::string> rows;
    std::string line;
    std::istringstream is(text);
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && rows.empty()) continue;
        if (!line.empty()) rows.push_back(line);
    }
    if (rows.empty()) throw std::invalid_argument("parse_maze: empty input");

    Maze m;
    m.height = static_cast<int>(rows.size());
    m.width = static_cast<int>(rows[0].size());
    m.walls.assign(static_cast<std::size_t>(m.height) * m.width, 0);

    bool have_start = false;
    for (int r = 0; r < m.height; ++r) {
        if (static_cast<int>(rows[r].size()) != m.width)
            parse_error(r, static_cast<int>(rows[r].size()),
                        "ragged row (expected width " + std::to_string(m.width) + ")");
        for (int c = 0; c < m.width; ++c) {
            Cell cell{r, c};
            switch (rows[r][c]) {
                case '#': m.walls[m.cell_index(cell)] = 1; break;
                case '.': break;
                case 'P':
                    if (have_start) parse_error(r, c, "duplicate start 'P'");
                    have_start = true;
                    m.start = cell;
                    break;
                case 'G': m.candidate_goals.push_back(cell); break;
                default: parse_error(r, c, std::string("unknown character '") + rows[r][c] + "'");
            }
        }
    }
    if (!have_start) throw std::invalid_argument("parse_maze: missing start 'P'");
    if (m.candidate_goals.empty()) throw std::invalid_argument("parse_maze: no candidate goals");

    for (const Cell& g : m.candidate_goals)
        if (!shortest_path_length(m, m.start, g))
            parse_error(g.row, g.col, "candidate goal unreachable from start");
    return m;
}

std::string serialize_maze(const Maze& maze) {
    std::string out;
    for (int r = 0; r < maze.height; ++r) {
        for (int c = 0; c < maze.width; ++c) {
            Cell cell{r, c};
            char ch = maze.is_wall(cell) ? '#' : '.';
            if (cell == maze.start) ch = 'P';
            for (const Cell& g : maze.candidate_goals)
                if (g == cell) ch = 'G';
            out.push_back(ch);
        }
        out.push_back('\n');
    }
    return out;
}

Maze load_maze_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_maze_file: cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_maze(ss.str());
}

MazeState initial_state(const Maze& maze, Cell goal, int budget) {
    bool listed = false;
    for (const Cell& g : maze.candidate_goals) listed = listed || g == goal;
    if (!listed) throw std::invalid_argument("initial_state: goal is not a candidate goal cell");
    MazeState s;
    s.position = maze.start;
    s.goal = goal;
    s.budget = budget;
    return s;
}

MazeStepResult step(const Maze& maze, const MazeState& state, MazeAction action) {
    if (state.done) throw std::logic_error("step: episode already finished");
    MazeState next = state;
    Cell target = moved(state.position, action);
    if (maze.in_bounds(target) && !maze.is_wall(target)) next.position = target;
    next.steps_used += 1;

    double reward = -1.0;
    bool done = false;
    if (next.position == state.goal) {
        reward += static_cast<double>(state.budget - next.steps_used);
        done = true;
    } else if (next.steps_used >= state.budget) {
        done = true;
    }
    next.done = done;
    return {next, reward, done};
}

MazeStepResult perfect_model(const Maze& maze, const MazeState& state, MazeAction action) {
    return step(maze, state, action);
}

std::optional<int> shortest_path_length(const Maze& maze, Cell from, Cell goal) {
    if (!maze.in_bounds(from) || !maze.in_bounds(goal) || maze.is_wall(from) || maze.is_wall(goal))
        return std::nullopt;
    std::vector<int> dist(static_cast<std::size_t>(maze.width) * maze.height, -1);
    std::deque<Cell> frontier{from};
    dist[maze.cell_index(from)] = 0;
    while (!frontier.empty()) {
        Cell cur = frontier.front();
        frontier.pop_front();
        if (cur == goal) return dist[maze.cell_index(cur)];
        for (MazeAction a : kMazeActions) {
            Cell n = moved(cur, a);
            if (!maze.in_bounds(n) || maze.is_wall(n)) continue;
            if (dist[maze.cell_index(n)] >= 0) continue;
            dist[maze.cell_index(n)] = dist[maze.cell_index(cur)] + 1;
            frontier.push_back(n);
        }
    }
    return std::nullopt;
}

double optimal_return(const Maze& maze, Cell goal, int budget) {
    auto length = shortest_path_length(maze, maze.start, goal);
    if (!length) throw std::invalid_argument("optimal_return: goal unreachable from start");
    int l = *length;
    if (l > budget) return -1.0;  // best achievable is wandering until the budget runs out
    // -1 per step for L steps, plus the terminal bonus (budget - L).
    return static_cast<double>(budget - 2 * l) / static_cast<double>(budget);
}

}  // namespace ibp
