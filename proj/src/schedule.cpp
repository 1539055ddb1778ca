#include "upr/schedule.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace upr {

int makespan(const Schedule& sched) {
    int best = 0;
    for (const auto& traj : sched.trajectories) {
        for (const auto& m : traj.moves) best = std::max(best, m.arrive);
    }
    return best;
}

NetworkFlow NetworkFlow::zeros(const PartialNetwork& net, int num_commodities) {
    NetworkFlow f;
    f.move.assign(num_commodities, std::vector<double>(net.num_movement(), 0.0));
    f.hold.assign(num_commodities, std::vector<double>(net.num_holdover(), 0.0));
    return f;
}

double NetworkFlow::move_total(int e) const {
    double s = 0.0;
    for (const auto& row : move) s += row[e];
    return s;
}

double NetworkFlow::hold_total(int e) const {
    double s = 0.0;
    for (const auto& row : hold) s += row[e];
    return s;
}

double NetworkFlow::hold_active(const PartialNetwork& net, const Instance& inst, int e) const {
    NodeId v = net.holdover(e).from.node;
    double s = 0.0;
    for (int k = 0; k < num_commodities(); ++k) {
        if (inst.is_active(k, v)) s += hold[k][e];
    }
    return s;
}

std::vector<Visit> visits(const Instance& inst, const Trajectory& traj, int horizon) {
    const auto& c = inst.commodity(traj.commodity);
    std::vector<Visit> out;
    Visit cur{c.origin, 0, horizon};
    for (const auto& m : traj.moves) {
        cur.departure = m.depart;
        out.push_back(cur);
        cur = {inst.arc(m.arc).head, m.arrive, horizon};
    }
    out.push_back(cur);
    return out;
}

nlohmann::json solution_to_json(const Instance& inst, const Schedule& sched) {
    using nlohmann::json;
    json list = json::array();
    for (const auto& traj : sched.trajectories) {
        json vs = json::array();
        for (const auto& v : visits(inst, traj, sched.horizon)) vs.push_back({v.node, v.arrival, v.departure});
        json arcs = json::array();
        for (const auto& m : traj.moves) arcs.push_back(m.arc);
        list.push_back({{"id", inst.commodity(traj.commodity).id}, {"visits", vs}, {"arcs", arcs}});
    }
    return {{"horizon", sched.horizon}, {"makespan", makespan(sched)}, {"commodities", list}};
}

Schedule solution_from_json(const Instance& inst, const nlohmann::json& doc) {
    Schedule sched;
    sched.horizon = doc.at("horizon").get<int>();
    const auto& list = doc.at("commodities");
    if (static_cast<int>(list.size()) != inst.num_commodities())
        throw std::runtime_error("solution: expected " + std::to_string(inst.num_commodities()) + " commodities");
    for (int k = 0; k < inst.num_commodities(); ++k) {
        const auto& jc = list.at(k);
        if (jc.at("id").get<int>() != inst.commodity(k).id)
            throw std::runtime_error("solution: commodity order does not match the instance");
        const auto& vs = jc.at("visits");
        if (vs.empty()) throw std::runtime_error("solution: empty visit list");
        std::vector<ArcId> pinned;
        if (jc.contains("arcs")) pinned = jc.at("arcs").get<std::vector<ArcId>>();
        Trajectory traj{k, {}};
        for (std::size_t i = 0; i + 1 < vs.size(); ++i) {
            NodeId from = vs[i].at(0).get<int>();
            NodeId to = vs[i + 1].at(0).get<int>();
            int dep = vs[i].at(2).get<int>();
            int arr = vs[i + 1].at(1).get<int>();
            ArcId chosen = -1;
            if (i < pinned.size()) {
                chosen = pinned[i];
            } else {
                for (ArcId a : inst.out_arcs(from)) {
                    if (inst.arc(a).head != to) continue;
                    if (chosen < 0 || inst.arc(a).transit == arr - dep) chosen = a;
                    if (inst.arc(a).transit == arr - dep) break;
                }
            }
            if (chosen < 0)
                throw std::runtime_error("solution: no arc " + std::to_string(from) + "->" + std::to_string(to));
            traj.moves.push_back({chosen, dep, arr});
        }
        sched.trajectories.push_back(std::move(traj));
    }
    return sched;
}

void write_solution(const Instance& inst, const Schedule& sched, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write solution file " + path);
    out << solution_to_json(inst, sched).dump(2) << "\n";
}

Schedule read_solution(const Instance& inst, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open solution file " + path);
    return solution_from_json(inst, nlohmann::json::parse(in));
}

}  // namespace upr
