#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

#include "rtrs/engine.hpp"

namespace rtrs {

namespace {

using nlohmann::json;

constexpr std::size_t kSharingWindow = 50;
constexpr std::size_t kSharingMinSamples = 10;

Seconds ceil_div(Seconds a, Seconds b) { return (a + b - 1) / b; }

json route_json(const Route &r) {
    json stops = json::array();
    for (const auto &s : r.stops)
        stops.push_back({s.kind == StopKind::Pickup ? "pickup" : "dropoff", s.request, s.location, s.time});
    return {{"vehicle", r.vehicle}, {"cost", r.cost}, {"stops", std::move(stops)}};
}

void write_json(const std::filesystem::path &file, const json &j) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error(fmt::format("cannot write {}", file.string()));
    out << j.dump(1) << '\n';
}

}  // namespace

int VehicleRecord::load() const noexcept {
    int n = 0;
    for (const auto &r : onboard) n += r.riders;
    return n;
}

Simulation::Simulation(std::span<const TripRecord> trips, const Network &network, SimConfig config,
                       EngineOptions options)
    : network_(&network), config_(std::move(config)), options_(std::move(options)), mode_(config_.mode) {
    config_.validate();
    ctx_ = config_.routing(network.travel);
    const auto &zones = network.zones;

    std::vector<TripRecord> history;
    for (const auto &t : trips) (t.request_time < config_.sim_start_s ? history : sim_trips_).push_back(t);
    stream_ = build_requests(sim_trips_, config_.capacity, network.travel, &report_.warnings);
    last_request_time_ = stream_.empty() ? config_.sim_start_s : stream_.back().request_time;

    state_.requests.reserve(stream_.size());
    for (std::size_t i = 0; i < stream_.size(); ++i) {
        if (stream_[i].id != static_cast<RequestId>(i)) throw std::logic_error("request ids must be dense");
        RequestOutcome o;
        o.request = stream_[i];
        o.origin_zone = network.zone_of(stream_[i].origin);
        o.destination_zone = network.zone_of(stream_[i].destination);
        o.max_ride = ctx_.max_ride(stream_[i]);
        state_.requests.push_back(o);
    }
    state_.status.assign(stream_.size(), RequestStatus::Unreleased);
    batcher_ = std::make_unique<EpochBatcher>(stream_, config_.epoch_seconds);

    first_epoch_ = static_cast<int>(ceil_div(config_.sim_start_s, config_.epoch_seconds));
    epoch_ = first_epoch_;

    // Evenly spaced over the location ids, relabelled by a seeded permutation.
    const auto L = static_cast<int>(network.location_count());
    if (L == 0 && config_.fleet_size > 0) throw ConfigError("network has no locations");
    std::vector<LocationId> relabel(static_cast<std::size_t>(L));
    std::iota(relabel.begin(), relabel.end(), 0);
    if (config_.shuffle_placement) {
        std::mt19937_64 rng(config_.seed);
        std::shuffle(relabel.begin(), relabel.end(), rng);
    }
    for (int v = 0; v < config_.fleet_size; ++v) {
        VehicleRecord rec;
        rec.id = v;
        rec.capacity = config_.capacity;
        const auto base = static_cast<std::size_t>(static_cast<long long>(v) * L / config_.fleet_size);
        rec.start_location = rec.location = relabel[base];
        rec.location_time = rec.leg_start = rec.clock = now();
        state_.vehicles.push_back(std::move(rec));
    }

    const auto Z = static_cast<std::size_t>(zones.zone_count());
    sharing_samples_.assign(Z, std::vector<std::deque<int>>(Z));

    if (mode_ == Mode::Forecast) {
        const Calendar cal{config_.calendar_offset_s};
        const auto periods = static_cast<int>(config_.sim_start_s / config_.relocation_period_s);
        observed_ = history.empty() ? empty_series(zones.zone_count(), config_.relocation_period_s)
                                    : aggregate_history(history, zones, config_.relocation_period_s,
                                                        config_.capacity, cal, periods);
        observed_.extend_to(periods);
        ForecastOptions fo;
        fo.k_max = config_.forecast_k_max;
        fo.granularity = config_.forecast_granularity;
        fo.scale = config_.forecast_scale;
        forecaster_ = std::make_unique<DemandForecaster>(fo, zones, cal);
        try {
            ++forecast_fits_;
            forecaster_->fit(observed_);
        } catch (const ForecastUnavailable &e) {
            report_.warnings.push_back(fmt::format("forecast unavailable ({}); running myopic", e.what()));
            forecaster_.reset();
            mode_ = Mode::Myopic;
        }
    }

    report_.mode = to_string(config_.mode);
    report_.seed = config_.seed;
    report_.start = now();
    report_.zone_count = zones.zone_count();
}

bool Simulation::done() const {
    if (now() < config_.min_end_s) return false;
    if (batcher_->exhausted() && completed_ == stream_.size()) return true;
    return now() > last_request_time_ + config_.drain_limit_s;
}

void Simulation::violation(std::string text) { report_.violations.push_back(std::move(text)); }

void Simulation::release(std::span<const Request> batch) {
    const Calendar cal{config_.calendar_offset_s};
    for (const auto &r : batch) {
        const auto id = static_cast<std::size_t>(r.id);
        state_.status[id] = RequestStatus::Waiting;
        state_.requests[id].request.arrival_epoch = r.arrival_epoch;
        if (mode_ == Mode::Forecast) observed_.add(r, network_->zones, cal);
    }
}

void Simulation::lock_in_progress() {
    const Seconds t = now();
    for (auto &v : state_.vehicles) {
        if (v.relocating || v.schedule.empty() || v.committed > 0 || v.leg_start >= t) continue;
        const auto &head = v.schedule.front();
        std::size_t k = 0;
        while (k < v.schedule.size() && v.schedule[k].time == head.time && v.schedule[k].location == head.location)
            ++k;
        v.committed = k;
        for (std::size_t i = 0; i < k; ++i)
            if (v.schedule[i].kind == StopKind::Pickup)
                state_.status[static_cast<std::size_t>(v.schedule[i].request)] = RequestStatus::Committed;
    }
}

std::vector<VehicleSnapshot> Simulation::snapshot() const {
    std::vector<VehicleSnapshot> out;
    const Seconds t = now();
    for (const auto &v : state_.vehicles) {
        if (v.relocating && !config_.relocating_assignable) continue;
        if (config_.freeze_scheduled) {
            const bool holds_open = std::any_of(v.schedule.begin(), v.schedule.end(), [&](const Stop &s) {
                return s.kind == StopKind::Pickup &&
                       state_.status[static_cast<std::size_t>(s.request)] == RequestStatus::Scheduled;
            });
            if (holds_open) continue;
        }
        VehicleSnapshot s;
        s.id = v.id;
        s.capacity = v.capacity;
        if (v.relocating) {
            s.start_location = v.relocation_target;
            s.earliest_departure = v.relocation_arrival;
            out.push_back(std::move(s));
            continue;
        }
        std::vector<ActiveRider> riders = v.onboard;
        if (v.committed > 0) {
            const auto &last = v.schedule[v.committed - 1];
            s.start_location = last.location;
            s.earliest_departure = last.time;
            for (std::size_t i = 0; i < v.committed; ++i) {
                const auto &stop = v.schedule[i];
                if (stop.kind == StopKind::Dropoff) {
                    std::erase_if(riders, [&](const ActiveRider &r) { return r.request == stop.request; });
                } else {
                    const auto &o = state_.requests[static_cast<std::size_t>(stop.request)];
                    riders.push_back({stop.request, o.request.riders, o.request.destination, stop.time, o.max_ride});
                }
            }
        } else {
            s.start_location = v.location;
            s.earliest_departure = std::max(t, v.location_time);
        }
        for (const auto &r : riders)
            s.onboard.push_back({r.request, r.dropoff, r.riders, s.earliest_departure - r.pickup, r.max_ride});
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<Request> Simulation::open_requests() const {
    std::vector<Request> out;
    for (std::size_t i = 0; i < state_.status.size(); ++i) {
        const auto st = state_.status[i];
        if (st == RequestStatus::Waiting || (st == RequestStatus::Scheduled && !config_.freeze_scheduled))
            out.push_back(state_.requests[i].request);
    }
    return out;
}

void Simulation::commit(const DispatchSolution &solution, std::span<const VehicleSnapshot> vehicles,
                        std::span<const Request> offered) {
    if (solution.chosen.size() != vehicles.size()) throw std::logic_error("dispatch returned the wrong route count");
    const RequestTable table(offered);
    for (const auto &r : offered) {
        auto &st = state_.status[static_cast<std::size_t>(r.id)];
        if (st != RequestStatus::Waiting && st != RequestStatus::Scheduled)
            throw std::logic_error(fmt::format("request {} offered in state {}", r.id, static_cast<int>(st)));
        st = RequestStatus::Waiting;
        state_.requests[static_cast<std::size_t>(r.id)].vehicle = -1;
    }
    for (std::size_t k = 0; k < vehicles.size(); ++k) {
        const auto &snap = vehicles[k];
        const auto &route = solution.chosen[k];
        if (route.vehicle != snap.id) throw std::logic_error("route assigned to the wrong vehicle");
        if (auto bad = check_route(route, snap, table, ctx_); !bad.empty())
            throw std::logic_error(fmt::format("vehicle {} got an inconsistent route: {}", snap.id, bad.front()));
        auto &v = state_.vehicles[static_cast<std::size_t>(snap.id)];
        v.schedule.erase(v.schedule.begin() + static_cast<std::ptrdiff_t>(v.committed), v.schedule.end());
        v.schedule.insert(v.schedule.end(), route.stops.begin(), route.stops.end());
        if (v.relocating) v.leg_start = v.relocation_arrival;
        else if (v.committed == 0) v.leg_start = snap.earliest_departure;
        for (auto id : route.served) {
            auto &st = state_.status[static_cast<std::size_t>(id)];
            if (st != RequestStatus::Waiting) throw std::logic_error(fmt::format("request {} served twice", id));
            st = RequestStatus::Scheduled;
            state_.requests[static_cast<std::size_t>(id)].vehicle = snap.id;
        }
    }
}

void Simulation::execute(VehicleRecord &v, const Stop &s) {
    auto &o = state_.requests[static_cast<std::size_t>(s.request)];
    auto &st = state_.status[static_cast<std::size_t>(s.request)];
    if (s.kind == StopKind::Pickup) {
        if ((st != RequestStatus::Scheduled && st != RequestStatus::Committed) || o.vehicle != v.id)
            throw std::logic_error(fmt::format("vehicle {} picks up request {} it does not own", v.id, s.request));
        if (s.location != o.request.origin) throw std::logic_error("pickup away from the origin");
        if (s.time < o.request.earliest_pickup)
            violation(fmt::format("request {} picked up before its earliest pickup", s.request));
        st = RequestStatus::PickedUp;
        o.pickup = s.time;
        v.onboard.push_back({s.request, o.request.riders, o.request.destination, s.time, o.max_ride});
        const int load = v.load();
        if (load > v.capacity)
            violation(fmt::format("vehicle {} carries {} riders (capacity {}) at t={}", v.id, load, v.capacity,
                                  s.time));
        auto &window = sharing_samples_[static_cast<std::size_t>(o.origin_zone)]
                                       [static_cast<std::size_t>(o.destination_zone)];
        window.push_back(load);
        if (window.size() > kSharingWindow) window.pop_front();
    } else {
        const auto it = std::find_if(v.onboard.begin(), v.onboard.end(),
                                     [&](const ActiveRider &r) { return r.request == s.request; });
        if (it == v.onboard.end())
            throw std::logic_error(fmt::format("vehicle {} drops request {} it does not carry", v.id, s.request));
        if (s.location != it->dropoff) throw std::logic_error("dropoff away from the destination");
        const Seconds ride = s.time - it->pickup;
        if (ride > it->max_ride)
            violation(fmt::format("request {} rode {} s, limit {} s", s.request, ride, it->max_ride));
        v.onboard.erase(it);
        st = RequestStatus::Completed;
        o.dropoff = s.time;
        ++v.requests_served;
        ++completed_;
    }
    v.location = s.location;
    v.location_time = s.time;
    v.leg_start = s.time;
    if (v.committed > 0) --v.committed;
}

void Simulation::advance_vehicle(VehicleRecord &v, Seconds t) {
    auto charge = [&v](Seconds until) {
        const Seconds dt = until - v.clock;
        if (v.relocating) v.relocating_s += dt;
        else if (!v.schedule.empty()) v.serving_s += dt;
        else v.idle_s += dt;
        v.clock = until;
    };
    while (true) {
        if (v.relocating && v.relocation_arrival <= t &&
            (v.schedule.empty() || v.relocation_arrival <= v.schedule.front().time)) {
            charge(v.relocation_arrival);
            v.relocating = false;
            v.location = v.relocation_target;
            v.location_time = v.relocation_arrival;
            v.leg_start = v.relocation_arrival;
            continue;
        }
        if (v.relocating || v.schedule.empty() || v.schedule.front().time > t) break;
        const Stop s = v.schedule.front();
        charge(s.time);
        v.schedule.pop_front();
        execute(v, s);
    }
    charge(t);
}

void Simulation::advance_to(Seconds t) {
    for (auto &v : state_.vehicles) advance_vehicle(v, t);
}

double Simulation::sharing(ZoneId i, ZoneId j) const {
    if (config_.sharing_mode == SharingMode::Constant) return config_.sharing_ratio;
    const auto &w = sharing_samples_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    if (w.size() < kSharingMinSamples) return config_.sharing_ratio;
    return static_cast<double>(std::accumulate(w.begin(), w.end(), 0L)) / static_cast<double>(w.size());
}

std::vector<std::vector<std::vector<int>>> Simulation::demand_forecast(Seconds start) const {
    const auto &zones = network_->zones;
    const auto Z = static_cast<std::size_t>(zones.zone_count());
    const auto T = static_cast<std::size_t>(config_.horizon);
    if (mode_ == Mode::Forecast)
        return forecaster_->predict(observed_, static_cast<int>(start / config_.relocation_period_s), config_.horizon);
    std::vector<std::vector<std::vector<int>>> out(Z, std::vector<std::vector<int>>(Z, std::vector<int>(T, 0)));
    for (std::size_t t = 0; t < T; ++t) {
        const auto counts = oracle_forecast(sim_trips_, start + static_cast<Seconds>(t) * config_.relocation_period_s,
                                            config_.relocation_period_s, zones, config_.capacity);
        for (std::size_t i = 0; i < Z; ++i)
            for (std::size_t j = 0; j < Z; ++j) out[i][j][t] = counts[i][j];
    }
    return out;
}

RelocationPlan Simulation::relocate() {
    ++relocation_calls_;
    const Seconds t = now();
    const auto &zones = network_->zones;
    const int Z = zones.zone_count();

    std::vector<FleetVehicleView> views;
    views.reserve(state_.vehicles.size());
    for (const auto &v : state_.vehicles) {
        FleetVehicleView fv;
        fv.id = v.id;
        fv.location = v.location;
        if (v.relocating) {
            fv.state = VehicleState::Relocating;
            fv.final_location = v.relocation_target;
            fv.final_time = v.relocation_arrival;
            if (!v.schedule.empty()) {
                fv.final_location = v.schedule.back().location;
                fv.final_time = v.schedule.back().time;
            }
        } else if (!v.schedule.empty()) {
            fv.state = VehicleState::Serving;
            fv.final_location = v.schedule.back().location;
            fv.final_time = v.schedule.back().time;
        }
        views.push_back(fv);
    }
    const auto est = estimate_idle(views, zones, config_.horizon, config_.relocation_period_s, t);

    MpcInput in;
    in.horizon = config_.horizon;
    const auto lambda = demand_forecast(t);
    in.demand.assign(static_cast<std::size_t>(Z), {});
    in.sharing.assign(static_cast<std::size_t>(Z), std::vector<double>(static_cast<std::size_t>(Z)));
    for (int i = 0; i < Z; ++i) {
        in.demand[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(Z));
        for (int j = 0; j < Z; ++j) {
            const auto &src = lambda[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            in.demand[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].assign(src.begin(), src.end());
            in.sharing[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = sharing(i, j);
        }
    }
    in.available = est.counts;
    in.tt = zones.tt_periods;

    const auto mpc = solve_mpc(in, config_.mpc_node_limit);
    std::vector<std::vector<int>> flows(static_cast<std::size_t>(Z), std::vector<int>(static_cast<std::size_t>(Z)));
    for (int i = 0; i < Z; ++i)
        for (int j = 0; j < Z; ++j)
            flows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                mpc.relocate[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)][0];
    auto plan = solve_vr(flows, est.idle_now, *network_);

    for (const auto &mv : plan.moves) {
        auto &v = state_.vehicles[static_cast<std::size_t>(mv.vehicle)];
        if (!v.idle()) throw std::logic_error(fmt::format("relocating busy vehicle {}", mv.vehicle));
        v.relocating = true;
        v.relocation_target = mv.target;
        v.relocation_arrival = t + mv.travel_seconds;
        ++v.relocations;
    }

    RelocationRecord rec;
    rec.epoch = epoch_;
    rec.time = t;
    for (const auto &list : est.idle_now) rec.idle_vehicles += static_cast<int>(list.size());
    rec.mpc_objective = mpc.objective;
    rec.mpc_unserved = mpc.unserved_total;
    rec.mpc_nodes = mpc.nodes;
    rec.mpc_optimal = mpc.optimal;
    rec.moves = static_cast<int>(plan.moves.size());
    rec.travel_seconds = plan.total_seconds;
    rec.overflow_events = plan.overflow_events;
    report_.relocations.push_back(rec);

    if (options_.relocation_trace_dir) {
        json moves = json::array();
        for (const auto &mv : plan.moves)
            moves.push_back({{"vehicle", mv.vehicle}, {"from_zone", mv.from_zone}, {"to_zone", mv.to_zone},
                             {"target", mv.target}, {"seconds", mv.travel_seconds}});
        json j{{"epoch", epoch_},          {"time", t},
               {"demand", lambda},         {"available", in.available},
               {"sharing", in.sharing},    {"relocate", mpc.relocate},
               {"passenger", mpc.passenger}, {"unserved", mpc.unserved},
               {"objective", mpc.objective}, {"optimal", mpc.optimal},
               {"moves", std::move(moves)}, {"overflow_events", plan.overflow_events}};
        std::filesystem::create_directories(*options_.relocation_trace_dir);
        write_json(*options_.relocation_trace_dir / fmt::format("relocation_{:06}.json", epoch_), j);
    }
    return plan;
}

void Simulation::step() {
    const Seconds t = now();
    if (mode_ != Mode::Myopic && (epoch_ - first_epoch_) % config_.omega == 0) relocate();

    const auto batch = batcher_->next(epoch_);
    release(batch);
    lock_in_progress();
    const auto vehicles = snapshot();
    const auto offered = open_requests();

    EpochRecord rec;
    rec.epoch = epoch_;
    rec.time = t;
    rec.batch = static_cast<int>(batch.size());
    rec.pending = static_cast<int>(offered.size());
    rec.vehicles = static_cast<int>(vehicles.size());
    if (!offered.empty()) {
        const auto sol = dispatch_epoch(vehicles, offered, epoch_, config_.dispatch(), ctx_);
        commit(sol, vehicles, offered);
        rec.pool = sol.pool_size;
        rec.iterations = sol.iterations;
        rec.lp_objective = sol.lp_objective;
        rec.mip_objective = sol.objective;
        rec.lp_trace = sol.lp_trace;
        rec.unserved = static_cast<int>(sol.unserved.size());
        rec.pricing_nodes = sol.pricing_nodes;
        rec.mip_nodes = sol.mip_nodes;
        rec.budget_exhausted = sol.budget_exhausted;
        if (options_.epoch_dump_dir) {
            json ids = json::array();
            for (const auto &r : offered) ids.push_back(r.id);
            json chosen = json::array();
            for (const auto &r : sol.chosen) chosen.push_back(route_json(r));
            json j{{"epoch", epoch_},
                   {"time", t},
                   {"requests", std::move(ids)},
                   {"pool_size", sol.pool_size},
                   {"lp_objective", sol.lp_objective},
                   {"mip_objective", sol.objective},
                   {"lp_trace", sol.lp_trace},
                   {"unserved", sol.unserved},
                   {"chosen", std::move(chosen)}};
            std::filesystem::create_directories(*options_.epoch_dump_dir);
            write_json(*options_.epoch_dump_dir / fmt::format("epoch_{:06}.json", epoch_), j);
        }
    }
    report_.epochs.push_back(std::move(rec));

    OccupancySample occ;
    occ.time = t;
    for (const auto &v : state_.vehicles) {
        const int load = v.load();
        if (load > 0) {
            ++occ.occupied;
            occ.riders += load;
        }
    }
    report_.occupancy.push_back(occ);

    advance_to(t + config_.epoch_seconds);
    ++epoch_;
}

SimulationReport Simulation::finish() {
    const Seconds end = now();
    advance_to(end);
    report_.end = end;
    for (const auto &v : state_.vehicles) {
        if (v.idle_s + v.serving_s + v.relocating_s != end - report_.start)
            violation(fmt::format("vehicle {} time budget {}+{}+{} does not cover {} s", v.id, v.idle_s, v.serving_s,
                                  v.relocating_s, end - report_.start));
        report_.vehicles.push_back({v.id, v.start_location, v.idle_s, v.serving_s, v.relocating_s, v.relocations,
                                    v.requests_served});
    }
    std::size_t open = 0;
    for (const auto st : state_.status)
        if (st != RequestStatus::Completed) ++open;
    if (open > 0) violation(fmt::format("{} requests never completed", open));
    report_.requests = state_.requests;
    return std::move(report_);
}

SimulationReport run(std::span<const TripRecord> trips, const Network &network, const SimConfig &config,
                     const EngineOptions &options) {
    Simulation sim(trips, network, config, options);
    while (!sim.done()) sim.step();
    return sim.finish();
}

}  // namespace rtrs
