// Small tour of the library: attractors, a product attractor check,
// dimensions, an inhomogeneous attractor and a product FIF.

#include <cmath>
#include <iostream>

#include "fractal/fractal.hpp"

int main() {
    using namespace fractal;

    const auto cantor = catalog::middle_third_cantor();
    const auto run = attractor_run(cantor, 1e-4);
    std::cout << "Cantor set: " << run.cloud.size() << " points after " << run.iterations
              << " iterations, within " << run.bound << "\n";

    const auto moran = moran_solve(cantor.ratios());
    const auto est = box_dimension_estimate(catalog::left_endpoints(cantor, 12), std::pow(3.0, -7), 1.0 / 9.0, 6);
    std::cout << "dimension: Moran " << moran.s << ", box count " << est.slope << "\n";

    const auto product = catalog::third_by_half();
    const auto rep = verify_product_attractor(product, 1e-3);
    std::cout << "product attractor vs embedded factors: " << rep.distance << " <= " << rep.bound
              << (rep.ok ? "" : "  (violated)") << "\n";

    const auto condensed = catalog::halving_with_one();
    const auto dec = decomposition_check(condensed, 10, 1e-3);
    std::cout << "x/2 with {1}: orbital decomposition distance " << dec.distance << " <= " << dec.bound << "\n";

    InterpolationData data({0.0, 0.5, 1.0}, {0.0, 1.0, 0.25});
    const auto pf = product_fif({{data, {0.3, -0.4}}, {data, {-0.2, 0.5}}}, 1024, 1e-9);
    const auto g = pf({0.5, 0.25});
    std::cout << "product FIF at (0.5, 0.25): (" << g[0] << ", " << g[1] << ")\n";
    return 0;
}
