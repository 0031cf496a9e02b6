#include "jss/ml/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "jss/error.hpp"

namespace jss::ml {

std::string to_string(Head head) {
  return head == Head::Regression ? "regression" : "classification";
}

void Dataset::add_row(std::span<const double> x, double y, RowProvenance prov) {
  if (x.size() != static_cast<std::size_t>(dim)) throw std::invalid_argument("row dimension mismatch");
  features.insert(features.end(), x.begin(), x.end());
  labels.push_back(y);
  provenance.push_back(prov);
}

namespace {

void check_optimum(const SolvedInstance& si) {
  if (si.optimum.start.size() != static_cast<std::size_t>(si.instance.op_count()))
    throw std::invalid_argument("incomplete optimum for instance " + std::to_string(si.id));
}

}  // namespace

Dataset build_regression_dataset(std::span<const SolvedInstance> solved) {
  Dataset ds;
  ds.mode = Head::Regression;
  for (const SolvedInstance& si : solved) {
    check_optimum(si);
    const JssInstance& inst = si.instance;
    for (int j = 0; j < inst.job_count(); ++j) {
      for (int i = 0; i < static_cast<int>(inst.job(j).ops.size()); ++i) {
        auto [f, label] = normalize(inst, j, extract_raw(inst, j, i),
                                    static_cast<double>(si.optimum.at(inst, j, i)));
        ds.add_row(f, *label, RowProvenance{si.id, j, i, -1, -1});
      }
    }
  }
  return ds;
}

Dataset build_classification_dataset(std::span<const SolvedInstance> solved) {
  Dataset ds;
  ds.mode = Head::Classification;
  std::vector<double> diff(kFeatureCount);
  for (const SolvedInstance& si : solved) {
    check_optimum(si);
    const JssInstance& inst = si.instance;

    std::vector<FeatureVector> norm(static_cast<std::size_t>(inst.op_count()));
    for (int v = 0; v < inst.op_count(); ++v) {
      const OpRef r = inst.op_ref(v);
      norm[static_cast<std::size_t>(v)] = extract_normalized(inst, r.job, r.op);
    }

    // Earlier in the optimum, start ties broken lexicographically.
    auto before = [&](int a, int b) {
      const int sa = si.optimum.start[static_cast<std::size_t>(a)];
      const int sb = si.optimum.start[static_cast<std::size_t>(b)];
      if (sa != sb) return sa < sb;
      return inst.op_ref(a) < inst.op_ref(b);
    };

    for (int m = 0; m < inst.machine_count(); ++m) {
      const auto& ops = inst.machine_ops(m);
      for (int a : ops) {
        for (int b : ops) {
          if (a == b) continue;
          for (int k = 0; k < kFeatureCount; ++k)
            diff[static_cast<std::size_t>(k)] =
                norm[static_cast<std::size_t>(a)][static_cast<std::size_t>(k)] -
                norm[static_cast<std::size_t>(b)][static_cast<std::size_t>(k)];
          const OpRef ra = inst.op_ref(a), rb = inst.op_ref(b);
          ds.add_row(diff, before(a, b) ? -1.0 : 1.0,
                     RowProvenance{si.id, ra.job, ra.op, rb.job, rb.op});
        }
      }
    }
  }
  return ds;
}

void write_dataset_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (int k = 1; k <= ds.dim; ++k) out << 'f' << k << ',';
  out << "label,instance,job,op,job_b,op_b\n";
  char buf[32];
  for (int r = 0; r < ds.rows(); ++r) {
    const auto row = ds.row(r);
    for (double v : row) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << buf << ',';
    }
    std::snprintf(buf, sizeof buf, "%.17g", ds.labels[static_cast<std::size_t>(r)]);
    const RowProvenance& p = ds.provenance[static_cast<std::size_t>(r)];
    out << buf << ',' << p.instance_id << ',' << p.job_a << ',' << p.op_a << ',' << p.job_b << ','
        << p.op_b << '\n';
  }
}

Dataset read_dataset_csv(const std::filesystem::path& path, Head mode) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty dataset file: " + path.string());
  int dim = 0;
  {
    std::istringstream hs(line);
    std::string col;
    while (std::getline(hs, col, ',')) {
      if (col.size() >= 2 && col[0] == 'f') ++dim;
      else break;
    }
  }
  if (dim < 1) throw FormatError("dataset header has no feature columns: " + path.string());

  Dataset ds;
  ds.mode = mode;
  ds.dim = dim;
  std::vector<double> x(static_cast<std::size_t>(dim));
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    std::string cell;
    auto next_cell = [&]() -> std::string {
      if (!std::getline(ls, cell, ',')) throw FormatError("truncated dataset row at line " + std::to_string(lineno));
      return cell;
    };
    for (int k = 0; k < dim; ++k) x[static_cast<std::size_t>(k)] = std::stod(next_cell());
    const double label = std::stod(next_cell());
    RowProvenance prov;
    prov.instance_id = std::stoi(next_cell());
    prov.job_a = std::stoi(next_cell());
    prov.op_a = std::stoi(next_cell());
    prov.job_b = std::stoi(next_cell());
    prov.op_b = std::stoi(next_cell());
    if (mode == Head::Classification && label != 1.0 && label != -1.0)
      throw FormatError("classification label must be +-1 at line " + std::to_string(lineno));
    ds.add_row(x, label, prov);
  }
  return ds;
}

}  // namespace jss::ml
