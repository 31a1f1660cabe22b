#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "nestedcuts/instances.hpp"

namespace nestedcuts {

namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kFamily = "pbsim-v1";

Json to_array(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vector from_array(const Json& a, int n, const char* what) {
  if (!a.is_array() || static_cast<int>(a.size()) != n)
    throw std::runtime_error(std::string("instance: '") + what + "' must be an array of length n");
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = a[static_cast<std::size_t>(i)].get<double>();
  return v;
}

}  // namespace

std::string instance_to_json(const PbsimInstance& inst) {
  Json doc;
  doc["T"] = inst.T;
  doc["n"] = inst.n;
  doc["x0"] = to_array(inst.x0);
  doc["box"] = Json{{"lo", inst.lo}, {"hi", inst.hi}};
  Json stages = Json::array();
  for (const auto& st : inst.stages) {
    Json reals = Json::array();
    for (const auto& r : st)
      reals.push_back(Json{{"prob", r.prob}, {"xi", to_array(r.xi)}, {"psi", r.psi}, {"u", r.u}});
    stages.push_back(Json{{"realizations", std::move(reals)}});
  }
  doc["stages"] = std::move(stages);
  doc["seed"] = inst.seed;
  doc["family"] = kFamily;
  return doc.dump(1);
}

void write_instance_json(std::ostream& os, const PbsimInstance& inst) {
  os << instance_to_json(inst) << '\n';
}

PbsimInstance read_instance_json(std::istream& is) {
  Json doc;
  try {
    doc = Json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string("instance: ") + e.what());
  }
  try {
    if (doc.at("family").get<std::string>() != kFamily)
      throw std::runtime_error("instance: unsupported family");
    PbsimInstance inst;
    inst.T = doc.at("T").get<int>();
    inst.n = doc.at("n").get<int>();
    if (inst.T < 1 || inst.n < 1) throw std::runtime_error("instance: T and n must be >= 1");
    inst.x0 = from_array(doc.at("x0"), inst.n, "x0");
    inst.lo = doc.at("box").at("lo").get<double>();
    inst.hi = doc.at("box").at("hi").get<double>();
    inst.seed = doc.at("seed").get<std::uint64_t>();
    const Json& stages = doc.at("stages");
    if (!stages.is_array() || static_cast<int>(stages.size()) != inst.T)
      throw std::runtime_error("instance: 'stages' must have T entries");
    for (const auto& st : stages) {
      std::vector<PbsimRealization> reals;
      for (const auto& r : st.at("realizations")) {
        PbsimRealization pr;
        pr.prob = r.at("prob").get<double>();
        pr.xi = from_array(r.at("xi"), inst.n, "xi");
        pr.psi = r.at("psi").get<double>();
        pr.u = r.at("u").get<double>();
        reals.push_back(std::move(pr));
      }
      inst.stages.push_back(std::move(reals));
    }
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("instance: ") + e.what());
  }
}

PbsimInstance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance '" + path + "'");
  return read_instance_json(in);
}

}  // namespace nestedcuts
