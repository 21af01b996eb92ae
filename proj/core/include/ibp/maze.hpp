#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ibp {

struct Cell {
    int row = 0;
    int col = 0;
    bool operator==(const Cell&) const = default;
};

enum class MazeAction : std::uint8_t { Up, Down, Left, Right };
inline constexpr int kMazeActionCount = 4;
inline constexpr MazeAction kMazeActions[4] = {MazeAction::Up, MazeAction::Down, MazeAction::Left,
                                               MazeAction::Right};
const char* maze_action_name(MazeAction a);

/// Static maze layout. Candidate goals are the cells an episode's goal may be
/// drawn from; the true goal is sampled per episode and is not part of the
/// layout state.
struct Maze {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> walls;  // row-major
    std::vector<Cell> candidate_goals;
    Cell start;

    bool in_bounds(Cell c) const {
        return c.row >= 0 && c.col >= 0 && c.row < height && c.col < width;
    }
    bool is_wall(Cell c) const { return walls[static_cast<std::size_t>(c.row) * width + c.col]; }
    std::size_t cell_index(Cell c) const { return static_cast<std::size_t>(c.row) * width + c.col; }
};

struct MazeState {
    Cell position;
    Cell goal;
    int steps_used = 0;
    int budget = 20;
    bool done = false;
};

struct MazeStepResult {
    MazeState state;
    double reward = 0.0;
    bool done = false;
};

/// Parses the character-grid format: '#' wall, '.' floor, 'P' start,
/// 'G' candidate goal. Rejects ragged grids, unknown characters, missing or
/// duplicate starts, zero candidates, and candidates unreachable from the
/// start, with line/column diagnostics.
Maze parse_maze(const std::string& text);

std::string serialize_maze(const Maze& maze);

Maze load_maze_file(const std::string& path);

MazeState initial_state(const Maze& maze, Cell goal, int budget = 20);

/// One move. Walls and boundaries block (position unchanged), every step
/// costs -1, and reaching the goal additionally pays the steps remaining in
/// the budget. Episodes also end when the budget is exhausted.
MazeStepResult step(const Maze& maze, const MazeState& state, MazeAction action);

/// The imagination's transition model. The maze dynamics are deterministic
/// and fully known, so this is exactly `step`; the separate entry point
/// documents that imagined transitions never touch a real episode.
MazeStepResult perfect_model(const Maze& maze, const MazeState& state, MazeAction action);

/// Shortest-path length from the start to `goal` by BFS, or nullopt when
/// unreachable.
std::optional<int> shortest_path_length(const Maze& maze, Cell from, Cell goal);

/// Optimal episode return under the implemented reward convention,
/// normalized by the budget: (budget - 2L) / budget for shortest path L.
double optimal_return(const Maze& maze, Cell goal, int budget = 20);

}  // namespace ibp
