#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <fmt/format.h>

#include "backheat/cli.hpp"
#include "backheat/errors.hpp"

namespace backheat::cli {

namespace {

std::string coordinate_header(const Grid& grid) {
  return grid.geometry() == Geometry::kInterval ? "dof,node,x,boundary" : "dof,i,j,r,theta,boundary";
}

void append_coordinates(std::string& out, const Grid& grid, std::size_t dof) {
  const NodePosition p = grid.position(dof);
  if (grid.geometry() == Geometry::kInterval) {
    out += fmt::format("{},{},{},{}", dof, p.i, format_number(p.x), p.boundary ? 1 : 0);
  } else {
    out += fmt::format("{},{},{},{},{},{}", dof, p.i, p.j, format_number(p.r),
                       format_number(p.theta), p.boundary ? 1 : 0);
  }
}

}  // namespace

std::string format_number(double v) { return fmt::format("{:.17g}", v); }

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string field_csv(const Grid& grid, const std::vector<std::string>& names,
                      const std::vector<const StateField*>& columns) {
  if (names.size() != columns.size()) throw DimensionError("field_csv: names and columns differ");
  for (const auto* c : columns) {
    if (!matches(*c, grid)) throw DimensionError("field_csv: column does not match the grid");
  }
  std::string out = coordinate_header(grid);
  for (const auto& n : names) out += "," + n;
  out += "\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    append_coordinates(out, grid, i);
    for (const auto* c : columns) out += "," + format_number((*c)[i]);
    out += "\n";
  }
  return out;
}

std::string trajectory_csv(const Grid& grid, const Trajectory& traj, bool final_only) {
  std::string out = "t," + coordinate_header(grid) + ",value\n";
  for (std::size_t m = final_only ? traj.states.size() - 1 : 0; m < traj.states.size(); ++m) {
    const std::string t = format_number(traj.time(m));
    for (std::size_t i = 0; i < grid.size(); ++i) {
      out += t + ",";
      append_coordinates(out, grid, i);
      out += "," + format_number(traj.states[m][i]) + "\n";
    }
  }
  return out;
}

std::string history_csv(const Reconstruction& rec) {
  std::string out = "n,cost,convergence_error,accuracy_error,alpha,gamma\n";
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  for (const auto& r : rec.ledger) {
    out += fmt::format("{},{},{},{},{},{}\n", r.n, format_number(r.cost), opt(r.convergence_error),
                       opt(r.accuracy_error), format_number(r.alpha), format_number(r.gamma));
  }
  return out;
}

std::string error_surface_csv(const Grid& grid, const StateField& exact, const StateField& rec) {
  if (grid.geometry() != Geometry::kDisk) throw ConfigError("error surface needs the disk geometry");
  if (!matches(exact, grid) || !matches(rec, grid)) {
    throw DimensionError("error surface fields do not match the grid");
  }
  std::string out = "r,theta,err\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const NodePosition p = grid.position(i);
    out += format_number(p.r) + "," + format_number(p.theta) + "," +
           format_number(exact[i] - rec[i]) + "\n";
  }
  return out;
}

unsigned worker_count(std::size_t jobs) {
  // BACKHEAT_THREADS replaces the hardware default when set.
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("BACKHEAT_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || cap < 1) {
      throw ConfigError("BACKHEAT_THREADS must be a positive integer");
    }
    n = static_cast<unsigned>(cap);
  }
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

}  // namespace backheat::cli
