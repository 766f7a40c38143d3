#include "qkalman/cli_io.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace qk {

namespace {

using ojson = nlohmann::ordered_json;

std::string cell_path(const std::string& field, Eigen::Index i) {
  return field + "[" + std::to_string(i) + "]";
}

std::string cell_path(const std::string& field, Eigen::Index i, Eigen::Index j) {
  return field + "[" + std::to_string(i) + "][" + std::to_string(j) + "]";
}

double number_at(const ojson& v, const std::string& path) {
  if (!v.is_number()) {
    throw ValidationError(path + ": expected a number");
  }
  return v.get<double>();
}

Complex complex_at(const ojson& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw ValidationError(path + ": expected a complex entry [re, im]");
  }
  return Complex(v[0].get<double>(), v[1].get<double>());
}

ComplexMatrix cmat_from_json(const ojson& v, Eigen::Index rows, Eigen::Index cols,
                             const std::string& field) {
  if (!v.is_array() || static_cast<Eigen::Index>(v.size()) != rows) {
    throw ValidationError(field + ": expected " + std::to_string(rows) + " rows");
  }
  ComplexMatrix out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const ojson& row = v[static_cast<size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw ValidationError(cell_path(field, i) + ": expected " + std::to_string(cols) +
                            " entries");
    }
    for (Eigen::Index j = 0; j < cols; ++j) {
      out(i, j) = complex_at(row[static_cast<size_t>(j)], cell_path(field, i, j));
    }
  }
  return out;
}

RealMatrix rmat_from_json(const ojson& v, Eigen::Index rows, Eigen::Index cols,
                          const std::string& field) {
  if (!v.is_array() || static_cast<Eigen::Index>(v.size()) != rows) {
    throw ValidationError(field + ": expected " + std::to_string(rows) + " rows");
  }
  RealMatrix out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const ojson& row = v[static_cast<size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw ValidationError(cell_path(field, i) + ": expected " + std::to_string(cols) +
                            " entries");
    }
    for (Eigen::Index j = 0; j < cols; ++j) {
      out(i, j) = number_at(row[static_cast<size_t>(j)], cell_path(field, i, j));
    }
  }
  return out;
}

ojson cmat_to_json(const ComplexMatrix& m) {
  ojson rows = ojson::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ojson row = ojson::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back(ojson::array({m(i, j).real(), m(i, j).imag()}));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

ojson rmat_to_json(const RealMatrix& m) {
  ojson rows = ojson::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ojson row = ojson::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::Index index_field(const ojson& doc, const char* key) {
  if (!doc.contains(key)) {
    throw ValidationError(std::string(key) + ": required field is missing");
  }
  const ojson& v = doc[key];
  if (!v.is_number_integer() || v.get<long long>() < 1) {
    throw ValidationError(std::string(key) + ": expected a positive integer");
  }
  return static_cast<Eigen::Index>(v.get<long long>());
}

const ojson& matrix_field(const ojson& doc, const char* key) {
  if (!doc.contains(key)) {
    throw ValidationError(std::string(key) + ": required field is missing");
  }
  return doc[key];
}

void forbid(const ojson& doc, const char* key, const std::string& representation) {
  if (doc.contains(key)) {
    throw ValidationError(std::string(key) + ": not allowed in a " + representation +
                          " spec");
  }
}

std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

std::string fmt_complex(Complex z) {
  std::string out = fmt_double(z.real());
  out += z.imag() < 0 ? "-" : "+";
  out += fmt_double(std::abs(z.imag()));
  out += "i";
  return out;
}

void print_rmat(std::ostringstream& os, const std::string& title, const RealMatrix& m) {
  os << title << " (" << m.rows() << "x" << m.cols() << "):\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    os << " ";
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << " " << fmt_double(m(i, j));
    os << "\n";
  }
}

void print_cmat(std::ostringstream& os, const std::string& title, const ComplexMatrix& m) {
  os << title << " (" << m.rows() << "x" << m.cols() << "):\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    os << " ";
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << " " << fmt_complex(m(i, j));
    os << "\n";
  }
}

}  // namespace

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string("fnv1a64:") + buf;
}

SystemSpecFile parse_spec(const std::string& json_text) {
  ojson doc;
  try {
    doc = ojson::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("spec is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) {
    throw ValidationError("spec: expected a JSON object");
  }

  static const std::set<std::string> known = {
      "name", "description", "representation", "n",  "m",
      "Omega_minus", "Omega_plus", "C_minus", "C_plus", "H", "C", "tolerances"};
  for (const auto& item : doc.items()) {
    if (known.find(item.key()) == known.end()) {
      throw ValidationError(item.key() + ": unknown field");
    }
  }

  SystemSpecFile spec;
  if (doc.contains("name")) {
    if (!doc["name"].is_string()) throw ValidationError("name: expected a string");
    spec.name = doc["name"].get<std::string>();
  }
  if (doc.contains("description")) {
    if (!doc["description"].is_string()) {
      throw ValidationError("description: expected a string");
    }
    spec.description = doc["description"].get<std::string>();
  }
  if (!doc.contains("representation") || !doc["representation"].is_string()) {
    throw ValidationError("representation: required string field is missing");
  }
  spec.representation = doc["representation"].get<std::string>();
  if (spec.representation != "complex" && spec.representation != "passive" &&
      spec.representation != "real") {
    throw ValidationError(
        "representation: must be one of \"complex\", \"passive\", \"real\"");
  }
  spec.n = index_field(doc, "n");
  spec.m = index_field(doc, "m");

  if (spec.representation == "complex") {
    forbid(doc, "H", spec.representation);
    forbid(doc, "C", spec.representation);
    spec.omega_minus = cmat_from_json(matrix_field(doc, "Omega_minus"), spec.n, spec.n,
                                      "Omega_minus");
    spec.omega_plus = cmat_from_json(matrix_field(doc, "Omega_plus"), spec.n, spec.n,
                                     "Omega_plus");
    spec.c_minus = cmat_from_json(matrix_field(doc, "C_minus"), spec.m, spec.n, "C_minus");
    spec.c_plus = cmat_from_json(matrix_field(doc, "C_plus"), spec.m, spec.n, "C_plus");
  } else if (spec.representation == "passive") {
    forbid(doc, "Omega_plus", spec.representation);
    forbid(doc, "C_plus", spec.representation);
    forbid(doc, "H", spec.representation);
    forbid(doc, "C", spec.representation);
    spec.omega_minus = cmat_from_json(matrix_field(doc, "Omega_minus"), spec.n, spec.n,
                                      "Omega_minus");
    spec.c_minus = cmat_from_json(matrix_field(doc, "C_minus"), spec.m, spec.n, "C_minus");
  } else {
    forbid(doc, "Omega_minus", spec.representation);
    forbid(doc, "Omega_plus", spec.representation);
    forbid(doc, "C_minus", spec.representation);
    forbid(doc, "C_plus", spec.representation);
    spec.h = rmat_from_json(matrix_field(doc, "H"), 2 * spec.n, 2 * spec.n, "H");
    spec.c = rmat_from_json(matrix_field(doc, "C"), 2 * spec.m, 2 * spec.n, "C");
  }

  if (doc.contains("tolerances")) {
    const ojson& t = doc["tolerances"];
    if (!t.is_object()) throw ValidationError("tolerances: expected an object");
    for (const auto& item : t.items()) {
      const std::string path = "tolerances." + item.key();
      const double value = number_at(item.value(), path);
      if (value <= 0.0) throw ValidationError(path + ": must be positive");
      if (item.key() == "rank_tol") {
        spec.tol.rank_tol = value;
      } else if (item.key() == "zero_tol") {
        spec.tol.zero_tol = value;
      } else if (item.key() == "eig_tol") {
        spec.tol.eig_tol = value;
      } else {
        throw ValidationError(path + ": unknown tolerance");
      }
    }
  }
  return spec;
}

SystemSpecFile parse_spec_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IOError("cannot read spec file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) {
    throw IOError("error while reading spec file: " + path);
  }
  return parse_spec(buf.str());
}

std::string emit_spec(const SystemSpecFile& spec) {
  ojson doc;
  if (!spec.name.empty()) doc["name"] = spec.name;
  if (!spec.description.empty()) doc["description"] = spec.description;
  doc["representation"] = spec.representation;
  doc["n"] = static_cast<long long>(spec.n);
  doc["m"] = static_cast<long long>(spec.m);
  if (spec.representation == "complex") {
    doc["Omega_minus"] = cmat_to_json(spec.omega_minus);
    doc["Omega_plus"] = cmat_to_json(spec.omega_plus);
    doc["C_minus"] = cmat_to_json(spec.c_minus);
    doc["C_plus"] = cmat_to_json(spec.c_plus);
  } else if (spec.representation == "passive") {
    doc["Omega_minus"] = cmat_to_json(spec.omega_minus);
    doc["C_minus"] = cmat_to_json(spec.c_minus);
  } else {
    doc["H"] = rmat_to_json(spec.h);
    doc["C"] = rmat_to_json(spec.c);
  }
  doc["tolerances"] = {{"rank_tol", spec.tol.rank_tol},
                       {"zero_tol", spec.tol.zero_tol},
                       {"eig_tol", spec.tol.eig_tol}};
  return doc.dump(2) + "\n";
}

DecompositionReport run_pipeline(const SystemSpecFile& spec) {
  DecompositionReport rep;
  rep.spec = spec;
  rep.input_checksum = fnv1a_hex(emit_spec(spec));

  QLSystem gsys;  // doubled-up system used for analysis in every branch
  if (spec.representation == "complex") {
    gsys = build_general(spec.omega_minus, spec.omega_plus, spec.c_minus, spec.c_plus,
                         &rep.symmetrized);
    rep.realizability = check_realizability(gsys, spec.tol.zero_tol);
  } else if (spec.representation == "real") {
    const RealQLSystem rsys = build_real(spec.h, spec.c, &rep.symmetrized);
    rep.realizability = check_realizability(rsys, spec.tol.zero_tol);
    gsys = to_complex(rsys);
  } else if (spec.representation == "passive") {
    PassiveQLSystem psys;
    psys = build_passive(spec.omega_minus, spec.c_minus, &rep.symmetrized);
    rep.realizability = check_realizability(psys, spec.tol.zero_tol);
    if (!rep.realizability.ok) {
      throw ValidationError("input system is not physically realizable (dynamics "
                            "residual " +
                            fmt_double(rep.realizability.dynamics_residual) +
                            ", coupling residual " +
                            fmt_double(rep.realizability.coupling_residual) + ")");
    }
    rep.passive = decompose_passive(psys, spec.tol);
    rep.result = rep.passive->doubled;
    gsys = embed_passive(psys);

    // Cross-check: the doubled-up pipeline must reproduce the dimensions and
    // the decoherence-free span found on the annihilation sector.
    const KalmanResult general = decompose(gsys, spec.tol);
    rep.cross_check.ran = true;
    rep.cross_check.n1 = general.n1;
    rep.cross_check.n2 = general.n2;
    rep.cross_check.n3 = general.n3;
    rep.cross_check.df_angle = subspace_distance(general.subspaces.r_cbar_obar,
                                                 rep.result.subspaces.r_cbar_obar);
    rep.cross_check.ok = general.n3 == 0 && general.n1 == rep.passive->n1 &&
                         general.n2 == rep.passive->n2 &&
                         rep.cross_check.df_angle <= 1e-8;
    if (!rep.cross_check.ok) {
      std::ostringstream os;
      os << "passive cross-check failed: doubled-up path found (n1, n2, n3) = ("
         << general.n1 << ", " << general.n2 << ", " << general.n3
         << ") with decoherence-free span distance " << rep.cross_check.df_angle;
      throw StructureError(os.str());
    }
  } else {
    throw ValidationError("representation: must be one of \"complex\", \"passive\", "
                          "\"real\"");
  }

  if (spec.representation != "passive") {
    if (!rep.realizability.ok) {
      throw ValidationError("input system is not physically realizable (dynamics "
                            "residual " +
                            fmt_double(rep.realizability.dynamics_residual) +
                            ", coupling residual " +
                            fmt_double(rep.realizability.coupling_residual) + ")");
    }
    rep.result = decompose(gsys, spec.tol);
  }

  rep.classification = classify_modes(rep.result);
  rep.bae_p_to_q = bae_check(rep.result, BAEDirection::kPinToQout, spec.tol.zero_tol);
  rep.bae_q_to_p = bae_check(rep.result, BAEDirection::kQinToPout, spec.tol.zero_tol);
  rep.flags = special_case_flags(gsys, rep.result);
  return rep;
}

namespace {

ojson bae_to_json(const BAEReport& b) {
  ojson o;
  o["verdict"] = b.verdict;
  o["markov_residual"] = b.markov_residual;
  o["transfer_residual"] = b.transfer_residual;
  return o;
}

ojson report_to_json(const DecompositionReport& rep) {
  const KalmanResult& r = rep.result;
  ojson doc;
  doc["tool"] = "qkalman";
  doc["format"] = "decomposition-report/v1";
  doc["input"] = ojson::parse(emit_spec(rep.spec));
  doc["input_checksum"] = rep.input_checksum;
  doc["representation"] = rep.spec.representation;
  doc["symmetrized"] = rep.symmetrized;
  doc["realizability"] = {{"ok", rep.realizability.ok},
                          {"dynamics_residual", rep.realizability.dynamics_residual},
                          {"coupling_residual", rep.realizability.coupling_residual}};
  doc["dimensions"] = {{"n", static_cast<long long>(r.n)},
                       {"m", static_cast<long long>(r.m)},
                       {"n1", static_cast<long long>(r.n1)},
                       {"n2", static_cast<long long>(r.n2)},
                       {"n3", static_cast<long long>(r.n3)},
                       {"na", static_cast<long long>(r.na)},
                       {"nb", static_cast<long long>(r.nb)}};
  doc["mode_labels"] = r.mode_labels;

  ojson transform;
  transform["T"] = cmat_to_json(r.T);
  transform["Ttilde"] = cmat_to_json(r.Ttilde);
  transform["S"] = rmat_to_json(r.S);
  transform["Stilde"] = rmat_to_json(r.Stilde);
  transform["Pi"] = rmat_to_json(r.Pi);
  doc["transform"] = std::move(transform);

  ojson cf;
  cf["Abar"] = cmat_to_json(r.cform.Abar);
  cf["Bbar"] = cmat_to_json(r.cform.Bbar);
  cf["Cbar"] = cmat_to_json(r.cform.Cbar);
  cf["A_h"] = cmat_to_json(r.cform.A_h);
  cf["A_12"] = cmat_to_json(r.cform.A_12);
  cf["A_13"] = cmat_to_json(r.cform.A_13);
  cf["A_21"] = cmat_to_json(r.cform.A_21);
  cf["A_31"] = cmat_to_json(r.cform.A_31);
  cf["A_co"] = cmat_to_json(r.cform.A_co);
  cf["A_df"] = cmat_to_json(r.cform.A_df);
  cf["B_h"] = cmat_to_json(r.cform.B_h);
  cf["B_co"] = cmat_to_json(r.cform.B_co);
  cf["C_h"] = cmat_to_json(r.cform.C_h);
  cf["C_co"] = cmat_to_json(r.cform.C_co);
  doc["complex_form"] = std::move(cf);

  ojson rf;
  rf["Abar"] = rmat_to_json(r.rform.Abar);
  rf["Bbar"] = rmat_to_json(r.rform.Bbar);
  rf["Cbar"] = rmat_to_json(r.rform.Cbar);
  rf["A_h11"] = rmat_to_json(r.rform.A_h11);
  rf["A_h12"] = rmat_to_json(r.rform.A_h12);
  rf["A_h22"] = rmat_to_json(r.rform.A_h22);
  rf["A_12"] = rmat_to_json(r.rform.A_12);
  rf["A_13"] = rmat_to_json(r.rform.A_13);
  rf["A_21"] = rmat_to_json(r.rform.A_21);
  rf["A_31"] = rmat_to_json(r.rform.A_31);
  rf["A_co"] = rmat_to_json(r.rform.A_co);
  rf["A_df"] = rmat_to_json(r.rform.A_df);
  rf["B_h"] = rmat_to_json(r.rform.B_h);
  rf["B_co"] = rmat_to_json(r.rform.B_co);
  rf["C_h"] = rmat_to_json(r.rform.C_h);
  rf["C_co"] = rmat_to_json(r.rform.C_co);
  rf["A_rearranged"] = rmat_to_json(r.rform.A_re);
  rf["B_rearranged"] = rmat_to_json(r.rform.B_re);
  rf["C_rearranged"] = rmat_to_json(r.rform.C_re);
  ojson perm = ojson::array();
  for (Eigen::Index idx : r.rform.rearrangement) perm.push_back(static_cast<long long>(idx));
  rf["rearrangement"] = std::move(perm);
  doc["real_form"] = std::move(rf);

  ojson cls;
  cls["df_modes"] = rep.classification.df_modes;
  cls["qnd_variables"] = rep.classification.qnd_variables;
  ojson pairs = ojson::array();
  for (const auto& pr : rep.classification.conjugate_pairs) {
    pairs.push_back(ojson::array({pr.first, pr.second}));
  }
  cls["conjugate_pairs"] = std::move(pairs);
  cls["qmfs_dimension"] = static_cast<long long>(rep.classification.qmfs_dim);
  cls["qnd_dynamics_residual"] = rep.classification.qnd_dynamics_residual;
  cls["qnd_input_residual"] = rep.classification.qnd_input_residual;
  cls["qnd_structure_ok"] = rep.classification.qnd_structure_ok;
  doc["classification"] = std::move(cls);

  doc["bae"] = {{"p_in_to_q_out", bae_to_json(rep.bae_p_to_q)},
                {"q_in_to_p_out", bae_to_json(rep.bae_q_to_p)}};

  ojson sc;
  sc["hamiltonian_preserves_unobservable"] = rep.flags.hamiltonian_preserves_unobservable;
  sc["a13_residual"] = rep.flags.a13_residual;
  sc["a31_residual"] = rep.flags.a31_residual;
  sc["coupling_avoids_h_sector"] = rep.flags.coupling_avoids_h_sector;
  sc["bh_residual"] = rep.flags.bh_residual;
  sc["ch_residual"] = rep.flags.ch_residual;
  sc["consistent"] = rep.flags.consistent;
  sc["report"] = rep.flags.report;
  doc["special_cases"] = std::move(sc);
  doc["h_markov_residual"] = h_markov_residual(r);

  if (rep.passive.has_value()) {
    const PassiveDecomposition& p = *rep.passive;
    ojson pj;
    pj["n1"] = static_cast<long long>(p.n1);
    pj["n2"] = static_cast<long long>(p.n2);
    pj["U1"] = cmat_to_json(p.U1);
    pj["U2"] = cmat_to_json(p.U2);
    pj["Abar"] = cmat_to_json(p.Abar);
    pj["Bbar"] = cmat_to_json(p.Bbar);
    pj["Cbar"] = cmat_to_json(p.Cbar);
    ojson ev = ojson::array();
    for (Eigen::Index i = 0; i < p.df_eigenvalues.size(); ++i) {
      ev.push_back(ojson::array({p.df_eigenvalues(i).real(), p.df_eigenvalues(i).imag()}));
    }
    pj["df_eigenvalues"] = std::move(ev);
    pj["cross_check"] = {{"ok", rep.cross_check.ok},
                         {"n1", static_cast<long long>(rep.cross_check.n1)},
                         {"n2", static_cast<long long>(rep.cross_check.n2)},
                         {"n3", static_cast<long long>(rep.cross_check.n3)},
                         {"df_angle", rep.cross_check.df_angle}};
    doc["passive"] = std::move(pj);
  }
  return doc;
}

std::string report_to_text(const DecompositionReport& rep) {
  const KalmanResult& r = rep.result;
  std::ostringstream os;
  os << "qkalman decomposition report\n";
  os << "============================\n";
  os << "input: " << (rep.spec.name.empty() ? "(unnamed)" : rep.spec.name) << " ("
     << rep.spec.representation << ", n=" << r.n << ", m=" << r.m << ")\n";
  os << "checksum: " << rep.input_checksum << "\n";
  os << "symmetrized: " << (rep.symmetrized ? "yes" : "no") << "\n";
  os << "realizability: " << (rep.realizability.ok ? "OK" : "VIOLATED")
     << " (dynamics " << fmt_double(rep.realizability.dynamics_residual) << ", coupling "
     << fmt_double(rep.realizability.coupling_residual) << ")\n";
  os << "mode counts: n1=" << r.n1 << " (co), n2=" << r.n2 << " (df), n3=" << r.n3
     << " (split; X=" << r.na << ", Y=" << r.nb << ")\n";
  os << "mode labels:";
  for (const std::string& label : r.mode_labels) os << " " << label << ";";
  os << "\n\n";

  print_rmat(os, "real canonical A, ordering (q_h, p_h, x_co, x_df)", r.rform.Abar);
  print_rmat(os, "real canonical B", r.rform.Bbar);
  print_rmat(os, "real canonical C", r.rform.Cbar);
  print_rmat(os, "rearranged A, ordering (q_h, x_co, x_df, p_h)", r.rform.A_re);
  print_rmat(os, "state change of basis S (x_bar = S^T x)", r.S);
  os << "\n";

  os << "classification:\n";
  os << "  decoherence-free modes:";
  if (rep.classification.df_modes.empty()) os << " none";
  for (const std::string& s : rep.classification.df_modes) os << " " << s << ";";
  os << "\n";
  os << "  QND variables:";
  if (rep.classification.qnd_variables.empty()) os << " none";
  for (const std::string& s : rep.classification.qnd_variables) os << " " << s << ";";
  os << "\n";
  os << "  QMFS dimension: " << rep.classification.qmfs_dim << "\n";
  os << "  QND structure: " << (rep.classification.qnd_structure_ok ? "OK" : "VIOLATED")
     << " (dynamics " << fmt_double(rep.classification.qnd_dynamics_residual)
     << ", input " << fmt_double(rep.classification.qnd_input_residual) << ")\n";
  os << "back-action evasion:\n";
  os << "  p_in -> q_out: " << (rep.bae_p_to_q.verdict ? "YES" : "NO") << " (markov "
     << fmt_double(rep.bae_p_to_q.markov_residual) << ", transfer "
     << fmt_double(rep.bae_p_to_q.transfer_residual) << ")\n";
  os << "  q_in -> p_out: " << (rep.bae_q_to_p.verdict ? "YES" : "NO") << " (markov "
     << fmt_double(rep.bae_q_to_p.markov_residual) << ", transfer "
     << fmt_double(rep.bae_q_to_p.transfer_residual) << ")\n";
  os << "special cases:\n";
  os << "  Hamiltonian preserves unobservable space: "
     << (rep.flags.hamiltonian_preserves_unobservable ? "yes" : "no") << " (|A_13| "
     << fmt_double(rep.flags.a13_residual) << ", |A_31| "
     << fmt_double(rep.flags.a31_residual) << ")\n";
  os << "  coupling avoids split sector: "
     << (rep.flags.coupling_avoids_h_sector ? "yes" : "no") << " (|B_h| "
     << fmt_double(rep.flags.bh_residual) << ", |C_h| "
     << fmt_double(rep.flags.ch_residual) << ")\n";
  os << "  consistent: " << (rep.flags.consistent ? "yes" : "no") << "\n";
  if (!rep.flags.report.empty()) os << "  note: " << rep.flags.report << "\n";

  if (rep.passive.has_value()) {
    const PassiveDecomposition& p = *rep.passive;
    os << "passive decomposition:\n";
    os << "  controllable modes: " << p.n1 << ", decoherence-free modes: " << p.n2
       << "\n";
    print_cmat(os, "  U2 (decoherence-free mode basis)", p.U2);
    os << "  decoherence-free eigenvalues:";
    if (p.df_eigenvalues.size() == 0) os << " none";
    for (Eigen::Index i = 0; i < p.df_eigenvalues.size(); ++i) {
      os << " " << fmt_complex(p.df_eigenvalues(i)) << ";";
    }
    os << "\n";
    os << "  doubled-up cross-check: " << (rep.cross_check.ok ? "OK" : "FAILED")
       << " (n1=" << rep.cross_check.n1 << ", n2=" << rep.cross_check.n2
       << ", n3=" << rep.cross_check.n3 << ", df angle "
       << fmt_double(rep.cross_check.df_angle) << ")\n";
  }
  return os.str();
}

}  // namespace

std::string emit_report(const DecompositionReport& report, ReportFormat format) {
  if (format == ReportFormat::kJson) {
    return report_to_json(report).dump(2) + "\n";
  }
  return report_to_text(report);
}

}  // namespace qk
