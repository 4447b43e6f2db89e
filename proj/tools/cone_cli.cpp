#include "acceptance.hpp"
#include "instance_io.hpp"

#include <CLI11.hpp>
#include <nucnorm/nucnorm.hpp>

#include <chrono>
#include <iostream>

using namespace nucnorm;
using io::Instance;
using io::json;

namespace {

enum Exit : int {
    kMember = 0,
    kNonMember = 1,
    kSearchExhausted = 2,
    kUsage = 10,
    kBadInput = 11,
    kNumeric = 12,
    kIo = 13,
};

struct Common {
    double tol = 1e-8;
    double tol_one = 1e-8;
    Index budget = 16;
    std::uint64_t seed = 0;
    std::string out;
    std::string format = "json";
    bool transpose = false;
    std::string in;

    Tolerances tolerances() const {
        Tolerances t;
        t.one = tol_one;
        return t;
    }
};

std::string command_line;

void emit(const Common &c, const std::string &text) {
    if (c.out.empty() || c.out == "-")
        std::cout << text;
    else
        io::write_file(c.out, text);
}

/// Reads the input instance, transposing every matrix when requested.
Instance load(const Common &c) {
    if (c.in.empty())
        throw io::FormatError("--in is required");
    Instance inst;
    if (c.in.size() > 4 && c.in.substr(c.in.size() - 4) == ".csv") {
        inst.kind = "matrix";
        inst.set("Z", io::matrix_from_csv(io::read_file(c.in)));
    } else {
        inst = io::read_instance(c.in);
    }
    if (inst.rows > inst.cols) {
        if (!c.transpose)
            throw std::invalid_argument(
                "instance has rows > cols; pass --transpose to work on the "
                "transposes");
        for (auto &[role, A] : inst.matrices)
            A.transposeInPlace();
        std::swap(inst.rows, inst.cols);
    }
    return inst;
}

bool transposed(const Common &c, const Instance &inst) {
    return c.transpose && inst.rows > inst.cols;
}

Matrix zbar_of(const Instance &inst) {
    if (inst.has("Z"))
        return inst.at("Z");
    return inst.at("X") + inst.at("Y");
}

json base_report(const Common &c, const Instance &inst, const std::string &cmd) {
    json r;
    r["schema"] = 1;
    r["command"] = cmd;
    r["argv"] = command_line;
    json digests = json::object();
    for (const auto &[role, A] : inst.matrices)
        digests[role] = io::hex64(io::digest(A));
    r["inputs"] = digests;
    r["tolerances"] = {{"tol", c.tol}, {"tol_one", c.tol_one}, {"budget", c.budget}};
    r["seed"] = c.seed;
    return r;
}

void write_matrix_output(const Common &c, Instance inst, const std::string &role,
                         const Matrix &A, bool flip) {
    Matrix outm = flip ? Matrix(A.transpose()) : A;
    if (c.format == "csv") {
        emit(c, io::matrix_to_csv(outm));
        return;
    }
    Instance o;
    o.kind = inst.kind;
    for (auto &[r, M] : inst.matrices)
        o.set(r, flip ? Matrix(M.transpose()) : M);
    o.set(role, outm);
    o.rows = outm.rows();
    o.cols = outm.cols();
    emit(c, io::instance_to_json(o).dump(2) + "\n");
}

int exit_for(const MembershipVerdict &v) {
    switch (v.state) {
    case VerdictState::member: return kMember;
    case VerdictState::non_member: return kNonMember;
    case VerdictState::search_exhausted: return kSearchExhausted;
    }
    return kNumeric;
}

int cmd_gen(const Common &c, const std::string &kind, Index m, Index n,
            const std::string &regime, Index n_beta, const std::string &point) {
    if (m < 1 || n < 1 || m > n)
        throw std::invalid_argument("gen: need 1 <= m <= n");
    Rng rng(c.seed);
    Tolerances tols = c.tolerances();
    Instance inst;
    inst.kind = kind;
    inst.seed = c.seed;
    Matrix X, Y;
    if (!point.empty()) {
        Instance p = io::read_instance(point);
        X = p.at("X");
        Y = p.at("Y");
    } else {
        GraphSample g = random_graph_point(m, n, parse_regime(regime), n_beta, rng);
        X = g.X;
        Y = g.Y;
    }
    inst.set("X", X);
    inst.set("Y", Y);
    GraphPoint pt = GraphPoint::make(X, Y, tols);
    if (kind == "graph-point") {
    } else if (kind == "tangent-dir") {
        auto [G, H] = tangent_direction(pt, rng);
        inst.set("G", G);
        inst.set("H", H);
    } else if (kind == "regular-candidate") {
        auto [Xs, Ys] = regular_candidate(pt, rng);
        inst.set("Xstar", Xs);
        inst.set("Ystar", Ys);
    } else if (kind == "limiting-candidate") {
        LimitingSample s = limiting_candidate(pt, rng);
        inst.set("G", s.G);
        inst.set("H", s.H);
    } else if (kind == "random-candidate") {
        auto [Xs, Ys] = random_candidate(pt.m(), pt.n(), rng);
        inst.set("Xstar", Xs);
        inst.set("Ystar", Ys);
    } else {
        throw std::invalid_argument("gen: unknown kind '" + kind + "'");
    }
    inst.tolerances = {{"tol", c.tol}, {"tol_one", c.tol_one}};
    emit(c, io::instance_to_json(inst).dump(2) + "\n");
    return 0;
}

int cmd_project(const Common &c) {
    Instance inst = load(c);
    Matrix P = project_spectral_ball(zbar_of(inst), c.tolerances());
    write_matrix_output(c, inst, "P", P, transposed(c, inst));
    return 0;
}

int cmd_dirderiv(const Common &c) {
    Instance inst = load(c);
    auto res = dir_derivative(zbar_of(inst), inst.at("H"), c.tolerances());
    write_matrix_output(c, inst, "D", res.value, transposed(c, inst));
    return 0;
}

std::pair<Matrix, Matrix> candidate(const Instance &inst) {
    if (inst.has("Xstar") || inst.has("Ystar"))
        return {inst.at("Xstar"), inst.at("Ystar")};
    return {inst.at("G"), inst.at("H")};
}

int cmd_check(const Common &c, const std::string &kind) {
    auto t0 = std::chrono::steady_clock::now();
    Instance inst = load(c);
    Tolerances tols = c.tolerances();
    LimitingOptions opt;
    opt.tol = c.tol;
    opt.budget = c.budget;
    opt.seed = c.seed;
    MembershipVerdict v;
    if (kind == "graph") {
        v = graph_membership(inst.at("X"), inst.at("Y"), c.tol, tols);
    } else if (kind == "tangent") {
        GraphPoint pt = GraphPoint::make(inst.at("X"), inst.at("Y"), tols);
        v = tangent_membership(pt, inst.at("G"), inst.at("H"), c.tol);
    } else if (kind == "regular" || kind == "limiting") {
        GraphPoint pt = GraphPoint::make(inst.at("X"), inst.at("Y"), tols);
        auto [A, B] = candidate(inst);
        v = kind == "regular" ? regular_normal_membership(pt, A, B, c.tol)
                              : limiting_normal_membership(pt, A, B, opt);
    } else if (kind == "coderiv" || kind == "coderiv-regular") {
        Matrix Z = inst.at("Z");
        ProjectionGraphPoint pt =
            inst.has("Y") ? ProjectionGraphPoint::make(Z, inst.at("Y"), tols)
                          : ProjectionGraphPoint::at(Z, tols);
        v = kind == "coderiv"
                ? coderivative_membership(pt, inst.at("S"), inst.at("W"), opt)
                : regular_coderivative_membership(pt, inst.at("S"), inst.at("W"),
                                                  c.tol);
    } else {
        throw std::invalid_argument("check: unknown kind '" + kind + "'");
    }
    json r = base_report(c, inst, "check " + kind);
    r["transposed"] = transposed(c, inst);
    r["verdict"] = io::verdict_to_json(v);
    r["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    emit(c, r.dump(2) + "\n");
    return exit_for(v);
}

std::vector<double> parse_grid(const std::string &s) {
    if (s.empty())
        return default_t_grid();
    std::vector<double> g;
    std::string cell;
    std::istringstream in(s);
    while (std::getline(in, cell, ','))
        g.push_back(io::parse_double(cell));
    require_t_grid(g);
    return g;
}

int cmd_sweep(const Common &c, const std::string &kind, const std::string &grid_s) {
    Instance inst = load(c);
    auto grid = parse_grid(grid_s);
    Tolerances tols = c.tolerances();
    std::vector<double> res;
    if (kind == "calmness") {
        Matrix Z = zbar_of(inst), H = inst.at("H");
        for (double t : grid)
            res.push_back(calmness_residual(Z, t * H, tols));
    } else if (kind == "fd") {
        Matrix Z = zbar_of(inst), H = inst.at("H");
        Matrix D = dir_derivative(Z, H, tols).value;
        for (const Matrix &q : fd_dir_derivative(Z, H, grid, tols))
            res.push_back((q - D).norm());
    } else if (kind == "distance") {
        GraphPoint pt = GraphPoint::make(inst.at("X"), inst.at("Y"), tols);
        res = graph_distance_probe(pt, inst.at("G"), inst.at("H"), grid);
    } else {
        throw std::invalid_argument("sweep: unknown kind '" + kind + "'");
    }
    std::string csv = "t,residual,residual_over_t,residual_over_t2\n";
    for (size_t i = 0; i < grid.size(); ++i) {
        double t = grid[i];
        csv += io::format_double(t) + "," + io::format_double(res[i]) + "," +
               io::format_double(res[i] / t) + "," +
               io::format_double(res[i] / (t * t)) + "\n";
    }
    emit(c, csv);
    return 0;
}

int cmd_selftest(const Common &c, double scale) {
    acceptance::Config cfg;
    cfg.scale = scale;
    if (c.seed)
        cfg.seed = c.seed;
    bool all = true;
    std::string text;
    for (const auto &run : acceptance::all_criteria()) {
        auto r = run(cfg);
        text += acceptance::format(r) + "\n";
        all = all && r.pass;
    }
    emit(c, text);
    return all ? 0 : 1;
}

void add_common(CLI::App *app, Common &c, bool with_input) {
    app->add_option("--tol", c.tol, "Relative membership tolerance");
    app->add_option("--tol-one", c.tol_one, "Tolerance for singular values equal to one");
    app->add_option("--budget", c.budget, "Random restarts per sub-partition shape");
    app->add_option("--seed", c.seed, "Random seed");
    app->add_option("--out", c.out, "Output path (default stdout)");
    app->add_option("--format", c.format, "Output format")
        ->check(CLI::IsMember({"json", "csv"}));
    if (with_input) {
        app->add_option("--in", c.in, "Instance file (JSON, or CSV matrix Z)")->required();
        app->add_flag("--transpose", c.transpose,
                      "Accept rows > cols by working on transposes");
    }
}

} // namespace

int main(int argc, char **argv) {
    for (int i = 0; i < argc; ++i)
        command_line += (i ? " " : "") + std::string(argv[i]);

    CLI::App app{"Spectral-ball projection and normal-cone membership tool"};
    app.require_subcommand(1);
    Common c;

    auto *gen = app.add_subcommand("gen", "Generate an instance");
    std::string gen_kind = "graph-point", regime = "mixed", point;
    Index m = 2, n = 3, n_beta = 1;
    gen->add_option("kind", gen_kind,
                    "graph-point | tangent-dir | regular-candidate | "
                    "limiting-candidate | random-candidate");
    gen->add_option("--m", m, "Rows");
    gen->add_option("--n", n, "Columns");
    gen->add_option("--regime", regime, "interior | boundary | alpha | mixed");
    gen->add_option("--beta", n_beta, "Number of unit singular values (boundary/mixed)");
    gen->add_option("--point", point, "Reuse the graph point stored in this instance");
    add_common(gen, c, false);

    auto *proj = app.add_subcommand("project", "Project Z onto the spectral-norm unit ball");
    add_common(proj, c, true);

    auto *dd = app.add_subcommand("dirderiv", "Directional derivative of the projection at Z along H");
    add_common(dd, c, true);

    auto *check = app.add_subcommand("check", "Membership test");
    std::string check_kind;
    check->add_option("kind", check_kind,
                      "graph | tangent | regular | limiting | coderiv | coderiv-regular")
        ->required();
    add_common(check, c, true);

    auto *sweep = app.add_subcommand("sweep", "Residual table over a t grid");
    std::string sweep_kind, grid;
    sweep->add_option("kind", sweep_kind, "calmness | fd | distance")->required();
    sweep->add_option("--t-grid", grid, "Comma-separated decreasing t values");
    add_common(sweep, c, true);

    auto *self = app.add_subcommand("selftest", "Run the acceptance suite");
    double scale = 1.0;
    self->add_option("--scale", scale, "Multiplier on instance counts");
    add_common(self, c, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kUsage;
    }

    try {
        if (*gen)
            return cmd_gen(c, gen_kind, m, n, regime, n_beta, point);
        if (*proj)
            return cmd_project(c);
        if (*dd)
            return cmd_dirderiv(c);
        if (*check)
            return cmd_check(c, check_kind);
        if (*sweep)
            return cmd_sweep(c, sweep_kind, grid);
        if (*self)
            return cmd_selftest(c, scale);
    } catch (const io::FormatError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kBadInput;
    } catch (const io::IoError &e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kIo;
    } catch (const NumericError &e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kNumeric;
    } catch (const std::invalid_argument &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kBadInput;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    }
    return kUsage;
}
