// A system whose safety hinges on a hidden threshold on x. The first model over-approximates the
// unsafe mass; one round of refinement recovers the threshold.
#include <fstream>
#include <iostream>

#include "slar/all.hpp"

int main() {
    std::ifstream in(SLAR_SAMPLE_DATA "/threshold_system.json");
    auto spec = slar::synthetic_spec_from_json(slar::json::parse(in));
    const auto train = slar::generate_synthetic_log(spec);
    spec.seed += 1;
    const auto test = slar::generate_synthetic_log(spec);

    const double truth = slar::ground_truth_probability(spec, train.stationary, slar::parse_predicate("y > 50"));
    const auto prop = slar::parse_property("y > 50 @ r=" + slar::detail::format_double(slar::threshold_with_margin(truth)));

    const auto rep = slar::run_slar(train.log, test.log, prop, slar::SlarConfig{});
    std::cout << "ground truth " << truth << "\n" << slar::report_table_header() << '\n'
              << slar::report_table_row(rep) << '\n';
    for (const auto& r : rep.rounds)
        std::cout << "round " << r.round << ": " << r.model_size << " states, P_learn " << r.p_learn
                  << (r.added_predicate ? ", added " + *r.added_predicate : "") << '\n';
    return rep.outcome == slar::Outcome::verified ? 0 : 1;
}
