#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "etmpc/errors.hpp"
#include "etmpc/sdp.hpp"

namespace etmpc::sdp {

void write_sparse_text(std::ostream& out, const ConicProgram& program) {
  program.validate();
  out << std::setprecision(17);
  out << "vars " << program.num_vars << "\n";
  for (int i = 0; i < program.num_vars; ++i) {
    if (program.objective(i) != 0.0) {
      out << "objective " << i + 1 << " " << program.objective(i) << "\n";
    }
  }
  for (std::size_t b = 0; b < program.blocks.size(); ++b) {
    const auto& blk = program.blocks[b];
    out << "block " << b + 1 << " " << blk.size << " " << (blk.tag.empty() ? "-" : blk.tag)
        << "\n";
  }
  for (std::size_t b = 0; b < program.blocks.size(); ++b) {
    const auto& blk = program.blocks[b];
    for (int c = 0; c < blk.size; ++c) {
      for (int r = 0; r <= c; ++r) {
        if (blk.constant(r, c) != 0.0) {
          out << b + 1 << " " << r + 1 << " " << c + 1 << " 0 " << blk.constant(r, c) << "\n";
        }
      }
    }
    for (const auto& vc : blk.coefficients) {
      // Sum duplicates so every upper-triangle position is written once.
      std::map<std::pair<int, int>, double> upper;
      for (const auto& e : vc.entries) {
        if (e.row <= e.col) upper[{e.row, e.col}] += e.value;
      }
      for (const auto& [pos, v] : upper) {
        if (v == 0.0) continue;
        out << b + 1 << " " << pos.first + 1 << " " << pos.second + 1 << " " << vc.var + 1
            << " " << v << "\n";
      }
    }
  }
}

ConicProgram read_sparse_text(std::istream& in) {
  ConicProgram prog;
  bool have_vars = false;
  std::map<std::pair<int, int>, std::map<std::pair<int, int>, double>> coeffs;
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& msg) -> ConfigError {
    return ConfigError(msg, line_no, "sparse");
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::string head;
    ls >> head;
    if (head == "vars") {
      if (!(ls >> prog.num_vars) || prog.num_vars < 0) throw fail("bad variable count");
      prog.objective = Eigen::VectorXd::Zero(prog.num_vars);
      have_vars = true;
    } else if (head == "objective") {
      int var;
      double v;
      if (!have_vars) throw fail("'objective' before 'vars'");
      if (!(ls >> var >> v) || var < 1 || var > prog.num_vars) throw fail("bad objective line");
      prog.objective(var - 1) = v;
    } else if (head == "block") {
      int id, size;
      std::string tag;
      if (!(ls >> id >> size) || size < 0) throw fail("bad block line");
      if (id != static_cast<int>(prog.blocks.size()) + 1) {
        throw fail("block ids must be consecutive from 1");
      }
      ls >> tag;
      AffineBlock blk;
      blk.tag = tag == "-" ? "" : tag;
      blk.size = size;
      blk.constant = Eigen::MatrixXd::Zero(size, size);
      prog.blocks.push_back(std::move(blk));
    } else {
      if (!have_vars) throw fail("coefficient before 'vars'");
      std::istringstream es(line);
      int b, r, c, var;
      double v;
      if (!(es >> b >> r >> c >> var >> v)) throw fail("malformed coefficient line");
      if (b < 1 || b > static_cast<int>(prog.blocks.size())) throw fail("unknown block id");
      const int n = prog.blocks[b - 1].size;
      if (r < 1 || c < 1 || r > n || c > n) throw fail("row/col out of range");
      if (r > c) throw fail("entries must be in the upper triangle (row <= col)");
      if (var < 0 || var > prog.num_vars) throw fail("variable id out of range");
      if (var == 0) {
        auto& C = prog.blocks[b - 1].constant;
        C(r - 1, c - 1) += v;
        if (r != c) C(c - 1, r - 1) += v;
      } else {
        coeffs[{b - 1, var - 1}][{r - 1, c - 1}] += v;
      }
    }
  }
  if (!have_vars) throw ConfigError("missing 'vars' line", line_no, "sparse");
  for (const auto& [key, entries] : coeffs) {
    VarCoefficient vc;
    vc.var = key.second;
    for (const auto& [pos, v] : entries) {
      vc.entries.push_back({pos.first, pos.second, v});
      if (pos.first != pos.second) vc.entries.push_back({pos.second, pos.first, v});
    }
    prog.blocks[key.first].coefficients.push_back(std::move(vc));
  }
  prog.validate();
  return prog;
}

}  // namespace etmpc::sdp
