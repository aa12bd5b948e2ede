#include "stackelberg/game_json.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace stackelberg {
namespace {

using nlohmann::json;

json vec_to_json(const Vec& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) {
    if (std::isfinite(v[i])) {
      out.push_back(v[i]);
    } else {
      out.push_back(nullptr);
    }
  }
  return out;
}

json mat_to_json(const Mat& m) {
  json out = json::array();
  for (Index r = 0; r < m.rows(); ++r) out.push_back(vec_to_json(m.row(r).transpose()));
  return out;
}

const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw StructuralError(where + ": missing key '" + key + "'");
  return j.at(key);
}

// null entries read as `missing` (used for infinite bounds).
Vec vec_from_json(const json& j, const std::string& where, double missing = std::numeric_limits<double>::quiet_NaN()) {
  if (!j.is_array()) throw StructuralError(where + ": expected an array");
  Vec v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j[i].is_null() && !std::isnan(missing)) {
      v[static_cast<Index>(i)] = missing;
    } else if (j[i].is_number()) {
      v[static_cast<Index>(i)] = j[i].get<double>();
    } else {
      throw StructuralError(where + ": expected numbers");
    }
  }
  return v;
}

Mat mat_from_json(const json& j, const std::string& where, Index cols_if_empty) {
  if (!j.is_array()) throw StructuralError(where + ": expected an array of rows");
  if (j.empty()) return Mat(0, cols_if_empty);
  const Index rows = static_cast<Index>(j.size());
  const Index cols = static_cast<Index>(j[0].size());
  Mat m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const Vec row = vec_from_json(j[static_cast<std::size_t>(r)], where);
    if (row.size() != cols) throw StructuralError(where + ": ragged matrix rows");
    m.row(r) = row.transpose();
  }
  return m;
}

}  // namespace

json game_to_json(const AggregativeGame& game) {
  const auto& leader = game.leader();
  if (leader.custom) throw UnsupportedFormError("a custom leader cost cannot be serialized");
  json j;
  j["n0"] = game.n0();
  j["N"] = game.N();
  j["m"] = game.m();
  j["b"] = vec_to_json(game.b());

  json l;
  l["R0"] = mat_to_json(leader.R0);
  l["r0"] = vec_to_json(leader.r0);
  l["S"] = json::array();
  for (const auto& s : leader.S) l["S"].push_back(mat_to_json(s));
  l["t"] = json::array();
  for (const auto& t : leader.t) l["t"].push_back(vec_to_json(t));
  l["Y0"] = {{"lo", vec_to_json(leader.lo)}, {"hi", vec_to_json(leader.hi)}};
  if (leader.G0.rows() > 0) {
    l["G0"] = mat_to_json(leader.G0);
    l["h0"] = vec_to_json(leader.h0);
  }
  j["leader"] = std::move(l);

  j["followers"] = json::array();
  for (const auto& f : game.followers()) {
    json fj;
    fj["Q"] = mat_to_json(f.Q);
    if (f.C.is_uniform()) {
      fj["C_row"] = {{"self", mat_to_json(f.C.self_block())}, {"other", mat_to_json(f.C.other_block())}};
    } else {
      json blocks = json::array();
      for (Index k = 0; k < f.C.size(); ++k) blocks.push_back(mat_to_json(f.C.block(k)));
      fj["C_row"] = {{"blocks", std::move(blocks)}};
    }
    fj["C0"] = mat_to_json(f.C0);
    fj["F"] = mat_to_json(f.F);
    fj["g"] = vec_to_json(f.g);
    fj["A"] = mat_to_json(f.A);
    if (f.h.size()) fj["h"] = vec_to_json(f.h);
    j["followers"].push_back(std::move(fj));
  }
  return j;
}

AggregativeGame game_from_json(const json& j) {
  try {
    const Index n0 = field(j, "n0", "game").get<Index>();
    const Index N = field(j, "N", "game").get<Index>();
    const Index m = field(j, "m", "game").get<Index>();
    const Vec b = vec_from_json(field(j, "b", "game"), "b");
    if (b.size() != m) throw StructuralError("b must have m entries");
    const json& fs = field(j, "followers", "game");
    if (!fs.is_array() || static_cast<Index>(fs.size()) != N) throw StructuralError("followers must list N entries");

    const json& lj = field(j, "leader", "game");
    LeaderData leader;
    leader.n0 = n0;
    leader.R0 = mat_from_json(field(lj, "R0", "leader"), "leader.R0", n0);
    if (leader.R0.rows() == 0) leader.R0 = Mat::Zero(n0, n0);
    leader.r0 = vec_from_json(field(lj, "r0", "leader"), "leader.r0");
    const json& y0 = field(lj, "Y0", "leader");
    const double inf = std::numeric_limits<double>::infinity();
    leader.lo = vec_from_json(field(y0, "lo", "leader.Y0"), "leader.Y0.lo", -inf);
    leader.hi = vec_from_json(field(y0, "hi", "leader.Y0"), "leader.Y0.hi", inf);
    if (lj.contains("G0")) {
      leader.G0 = mat_from_json(lj.at("G0"), "leader.G0", n0);
      leader.h0 = vec_from_json(field(lj, "h0", "leader"), "leader.h0");
    } else {
      leader.G0 = Mat(0, n0);
      leader.h0 = Vec(0);
    }

    std::vector<FollowerData> followers;
    for (Index i = 0; i < N; ++i) {
      const json& fj = fs[static_cast<std::size_t>(i)];
      const std::string where = "followers[" + std::to_string(i) + "]";
      FollowerData f;
      f.Q = mat_from_json(field(fj, "Q", where), where + ".Q", 0);
      const Index ni = f.Q.rows();
      const json& cj = field(fj, "C_row", where);
      if (cj.contains("blocks")) {
        std::vector<Mat> blocks;
        for (const auto& bj : cj.at("blocks")) blocks.push_back(mat_from_json(bj, where + ".C_row", 0));
        if (static_cast<Index>(blocks.size()) != N) throw StructuralError(where + ".C_row must hold N blocks");
        f.C = InteractionRow::compact(std::move(blocks), i);
      } else {
        f.C = InteractionRow::uniform(mat_from_json(field(cj, "self", where + ".C_row"), where + ".C_row.self", ni),
                                      mat_from_json(field(cj, "other", where + ".C_row"), where + ".C_row.other", ni),
                                      N, i);
      }
      f.C0 = mat_from_json(field(fj, "C0", where), where + ".C0", n0);
      if (f.C0.rows() == 0) f.C0 = Mat::Zero(ni, n0);
      f.F = mat_from_json(field(fj, "F", where), where + ".F", ni);
      f.g = vec_from_json(field(fj, "g", where), where + ".g");
      f.A = mat_from_json(field(fj, "A", where), where + ".A", ni);
      if (f.A.rows() == 0) f.A = Mat::Zero(m, ni);
      if (fj.contains("h")) f.h = vec_from_json(fj.at("h"), where + ".h");
      followers.push_back(std::move(f));
    }

    const json& S = field(lj, "S", "leader");
    const json& t = field(lj, "t", "leader");
    if (!S.is_array() || static_cast<Index>(S.size()) != N || !t.is_array() || static_cast<Index>(t.size()) != N) {
      throw StructuralError("leader.S and leader.t must list N entries");
    }
    for (Index i = 0; i < N; ++i) {
      Mat s = mat_from_json(S[static_cast<std::size_t>(i)], "leader.S", followers[static_cast<std::size_t>(i)].dim());
      if (s.rows() == 0) s = Mat::Zero(n0, followers[static_cast<std::size_t>(i)].dim());
      leader.S.push_back(std::move(s));
      leader.t.push_back(vec_from_json(t[static_cast<std::size_t>(i)], "leader.t"));
    }
    return AggregativeGame(std::move(leader), std::move(followers), b);
  } catch (const json::exception& e) {
    throw StructuralError(std::string("malformed game JSON: ") + e.what());
  }
}

AggregativeGame load_game(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open game file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw StructuralError("'" + path + "' is not valid JSON: " + e.what());
  }
  return game_from_json(j);
}

void save_game(const AggregativeGame& game, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw PreconditionError("cannot write game file '" + path + "'");
  out << game_to_json(game).dump() << '\n';
}

}  // namespace stackelberg
