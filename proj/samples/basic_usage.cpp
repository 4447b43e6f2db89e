// Builds a graph point with a unit singular value, tests a few candidate
// normals, and turns a limiting certificate into an approximating sequence.
#include <nucnorm/nucnorm.hpp>

#include <cstdio>

using namespace nucnorm;

int main() {
    Rng rng(2026);

    Vector sigma(3);
    sigma << 2.0, 1.0, 0.4;
    GraphSample g = graph_point_from_spectrum(sigma, 4, rng);
    GraphPoint pt = GraphPoint::make(g.X, g.Y);
    std::printf("graph: %s\n", to_string(graph_membership(pt.X, pt.Y).state));

    Matrix Z = pt.Zbar;
    std::printf("||Pi_B(Z)||_2 = %.6f\n", spectral_norm(project_spectral_ball(Z)));

    auto [Xs, Ys] = regular_candidate(pt, rng);
    auto reg = regular_normal_membership(pt, Xs, Ys);
    auto probe = proximal_inequality_probe(pt, Xs, Ys, 100, 1);
    std::printf("regular candidate: %s, probe max %.2e\n", to_string(reg.state),
                probe.max_violation);

    LimitingSample lim = limiting_candidate(pt, rng);
    auto v = limiting_normal_membership(pt, lim.G, lim.H);
    std::printf("limiting candidate: %s\n", to_string(v.state));
    if (!v.member())
        return 1;

    for (int k : {10, 100, 1000}) {
        SequenceTerm t = construct_sequence(pt, lim.G, lim.H, *v.certificate, k);
        GraphPoint pk = GraphPoint::make(t.Xk, t.Yk);
        bool regular = regular_normal_membership(pk, t.Gk, t.Hk).member();
        double err = pair_norm(t.Xk - pt.X, t.Yk - pt.Y) +
                     pair_norm(t.Gk - lim.G, t.Hk - lim.H);
        std::printf("k = %4d  regular: %s  distance to limit: %.3e\n", k,
                    regular ? "yes" : "no", err);
        if (!regular)
            return 1;
    }
    return 0;
}
