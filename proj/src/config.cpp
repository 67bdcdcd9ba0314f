#include "levytrade/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "levytrade/errors.hpp"

namespace levytrade {
namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& allowed_keys()
{
    static const std::map<std::string, std::set<std::string>> keys{
        {"model",
         {"kind", "lambda", "b", "mu", "sigma2", "eta", "a", "alpha1", "alpha2", "mu1", "mu2",
          "sigma11", "sigma22", "rho", "eta1", "eta2"}},
        {"grid", {"delta", "horizon", "inner_delta"}},
        {"strategy",
         {"search", "x0", "x0_1", "x0_2", "c", "d_lo", "d_hi", "c_lo", "c_hi", "coarse_step",
          "fine_step", "r", "gamma", "loess_span"}},
        {"mc", {"paths", "seed", "threads"}},
        {"cv", {"enabled", "p", "events", "window"}},
        {"output", {"dir", "name", "sample_paths"}},
    };
    return keys;
}

class Reader
{
  public:
    explicit Reader(const pt::ptree& tree) : tree_(tree) {}

    bool has(const std::string& key) const { return tree_.get_child_optional(key).has_value(); }

    std::string text(const std::string& key, const std::string& fallback) const
    {
        return tree_.get<std::string>(key, fallback);
    }

    double number(const std::string& key, double fallback) const
    {
        return has(key) ? number(key) : fallback;
    }

    double number(const std::string& key) const
    {
        std::string const s = tree_.get<std::string>(key);
        try
        {
            std::size_t used = 0;
            double const v = std::stod(s, &used);
            if (used != s.size() || !std::isfinite(v))
                throw std::invalid_argument(s);
            return v;
        }
        catch (const std::exception&)
        {
            throw ConfigError(key, "expected a number, got '" + s + "'");
        }
    }

    std::uint64_t integer(const std::string& key, std::uint64_t fallback) const
    {
        if (!has(key))
            return fallback;
        std::string const s = tree_.get<std::string>(key);
        try
        {
            std::size_t used = 0;
            if (!s.empty() && s[0] == '-')
                throw std::invalid_argument(s);
            std::uint64_t const v = std::stoull(s, &used);
            if (used != s.size())
                throw std::invalid_argument(s);
            return v;
        }
        catch (const std::exception&)
        {
            throw ConfigError(key, "expected a non-negative integer, got '" + s + "'");
        }
    }

    bool flag(const std::string& key, bool fallback) const
    {
        if (!has(key))
            return fallback;
        std::string const s = tree_.get<std::string>(key);
        if (s == "true" || s == "1" || s == "yes")
            return true;
        if (s == "false" || s == "0" || s == "no")
            return false;
        throw ConfigError(key, "expected true or false, got '" + s + "'");
    }

    std::vector<std::size_t> integers(const std::string& key) const
    {
        std::vector<std::size_t> out;
        std::stringstream ss(tree_.get<std::string>(key));
        std::string item;
        while (std::getline(ss, item, ','))
        {
            auto const b = item.find_first_not_of(" \t");
            auto const e = item.find_last_not_of(" \t");
            if (b == std::string::npos)
                throw ConfigError(key, "empty list entry");
            item = item.substr(b, e - b + 1);
            try
            {
                std::size_t used = 0;
                if (item[0] == '-')
                    throw std::invalid_argument(item);
                out.push_back(std::stoull(item, &used));
                if (used != item.size())
                    throw std::invalid_argument(item);
            }
            catch (const std::exception&)
            {
                throw ConfigError(key, "expected a list of positive integers");
            }
        }
        return out;
    }

  private:
    const pt::ptree& tree_;
};

void check_keys(const pt::ptree& tree)
{
    auto const& keys = allowed_keys();
    for (auto const& [section, body] : tree)
    {
        auto const it = keys.find(section);
        if (it == keys.end())
            throw ConfigError(section, "unknown section");
        for (auto const& [key, value] : body)
            if (!it->second.count(key))
                throw ConfigError(section + "." + key, "unknown key");
    }
}

SearchKind parse_search(const std::string& s)
{
    if (s == "symmetric_d")
        return SearchKind::symmetric_d;
    if (s == "asymmetric_d")
        return SearchKind::asymmetric_d;
    if (s == "exit_entry")
        return SearchKind::exit_entry;
    if (s == "bivariate_d")
        return SearchKind::bivariate_d;
    if (s == "bivariate_symmetric_d")
        return SearchKind::bivariate_symmetric_d;
    throw ConfigError("strategy.search", "unknown search '" + s + "'");
}

void require(bool ok, const std::string& field, const std::string& message)
{
    if (!ok)
        throw ConfigError(field, message);
}

}  // namespace

std::string to_string(ModelKind kind)
{
    return kind == ModelKind::ou_vg ? "ou_vg" : "ou_wvag";
}

std::string to_string(SearchKind kind)
{
    switch (kind)
    {
    case SearchKind::symmetric_d: return "symmetric_d";
    case SearchKind::asymmetric_d: return "asymmetric_d";
    case SearchKind::exit_entry: return "exit_entry";
    case SearchKind::bivariate_d: return "bivariate_d";
    case SearchKind::bivariate_symmetric_d: return "bivariate_symmetric_d";
    }
    return "unknown";
}

std::vector<double> GridRange::values() const
{
    std::vector<double> out;
    if (!(step > 0.0) || hi < lo)
        return out;
    auto const n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
    out.reserve(n + 1);
    for (std::size_t i = 0; i <= n; ++i)
        out.push_back(lo + static_cast<double>(i) * step);
    return out;
}

std::vector<double> Scenario::mu_bar() const
{
    if (model == ModelKind::ou_vg)
        return {stationary_mean(vg)};
    Eigen::VectorXd const m = stationary_mean(wvag);
    return {m.data(), m.data() + m.size()};
}

std::vector<double> Scenario::stationary_sd() const
{
    std::vector<double> out;
    if (model == ModelKind::ou_vg)
        out.push_back(std::sqrt(stationary_moments(vg).variance));
    else
        for (std::size_t k = 0; k < wvag.dim(); ++k)
            out.push_back(std::sqrt(stationary_moments(wvag, k).variance));
    return out;
}

GridRange Scenario::d_range(std::size_t k, double step) const
{
    double const hi = d_hi.value_or(5.0 * stationary_sd()[k]);
    return {d_lo.value_or(0.05), hi, step};
}

GridRange Scenario::c_range(double step) const
{
    return {c_lo, c_hi.value_or(d_range(0, step).hi), step};
}

void Scenario::validate() const
{
    try
    {
        if (model == ModelKind::ou_vg)
            vg.validate();
        else
            wvag.validate();
    }
    catch (const std::invalid_argument& e)
    {
        throw ConfigError("model", e.what());
    }
    try
    {
        grid.validate();
    }
    catch (const std::invalid_argument& e)
    {
        throw ConfigError("grid", e.what());
    }
    bool const bivariate =
        search == SearchKind::bivariate_d || search == SearchKind::bivariate_symmetric_d;
    require(bivariate == (model == ModelKind::ou_wvag), "strategy.search",
            "bivariate searches need model.kind = ou_wvag and univariate ones ou_vg");
    require(model == ModelKind::ou_vg || grid.inner_delta.has_value(), "grid.inner_delta",
            "required for the ou_wvag model");
    require(x0.size() == dim(), "strategy.x0", "needs one value per spread");
    require(c >= 0.0, "strategy.c", "must be >= 0");
    require(coarse_step > 0.0, "strategy.coarse_step", "must be > 0");
    require(fine_step > 0.0 && fine_step <= coarse_step, "strategy.fine_step",
            "must lie in (0, coarse_step]");
    require(r >= 0.0, "strategy.r", "must be >= 0");
    require(gamma >= 0.0, "strategy.gamma", "must be >= 0");
    require(loess_span >= 0.0 && loess_span <= 1.0, "strategy.loess_span",
            "must lie in [0, 1]");
    for (std::size_t k = 0; k < dim(); ++k)
    {
        GridRange const d = d_range(k, coarse_step);
        require(d.lo > 0.0, "strategy.d_lo", "must be > 0");
        require(d.hi >= d.lo, "strategy.d_hi", "must be >= d_lo");
        if (search != SearchKind::exit_entry)
            require(c < d.lo, "strategy.c", "exit level must satisfy c < d for every grid d");
    }
    if (search == SearchKind::exit_entry)
    {
        GridRange const cr = c_range(coarse_step);
        require(cr.lo >= 0.0, "strategy.c_lo", "must be >= 0");
        require(cr.hi >= cr.lo, "strategy.c_hi", "must be >= c_lo");
        require(cr.lo < d_range(0, coarse_step).hi, "strategy.c_lo",
                "no grid pair satisfies c < d");
    }
    require(paths >= 100, "mc.paths", "must be >= 100");
    if (cv)
    {
        require(model == ModelKind::ou_vg && search == SearchKind::symmetric_d, "cv.enabled",
                "control variates need an ou_vg model with a symmetric_d search");
        require(!cv->p_grid.empty(), "cv.p", "must list at least one value");
        for (std::size_t p : cv->p_grid)
            require(p >= 1 && p <= grid.steps(), "cv.p", "values must lie in [1, steps]");
        require(cv->window >= 0.0, "cv.window", "must be >= 0");
        std::size_t const regressors = 2 * *std::max_element(cv->p_grid.begin(), cv->p_grid.end()) + 3;
        require(paths > regressors + 1, "mc.paths", "too few paths for the largest cv.p");
    }
}

Scenario parse_scenario(std::istream& in)
{
    pt::ptree tree;
    try
    {
        pt::read_ini(in, tree);
    }
    catch (const pt::ini_parser_error& e)
    {
        throw ConfigError("config", e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    check_keys(tree);
    Reader const rd(tree);

    Scenario s;
    std::string const kind = rd.text("model.kind", "ou_vg");
    if (kind == "ou_vg")
    {
        s.model = ModelKind::ou_vg;
        s.vg.lambda = rd.number("model.lambda", 1.0);
        s.vg.b = rd.number("model.b", 1.0);
        s.vg.mu = rd.number("model.mu", 0.0);
        s.vg.sigma2 = rd.number("model.sigma2", 0.015);
        s.vg.eta = rd.number("model.eta", -s.vg.mu);
    }
    else if (kind == "ou_wvag")
    {
        s.model = ModelKind::ou_wvag;
        double const mu1 = rd.number("model.mu1", 0.0);
        double const mu2 = rd.number("model.mu2", 0.0);
        double const rho = rd.number("model.rho", 0.0);
        require(rho > -1.0 && rho < 1.0, "model.rho", "must lie in (-1, 1)");
        s.wvag = OuWvagParams::bivariate(
            rd.number("model.lambda", 1.0), rd.number("model.a", 1.0),
            rd.number("model.alpha1", 0.5), rd.number("model.alpha2", 0.5), mu1, mu2,
            rd.number("model.sigma11", 0.015), rd.number("model.sigma22", 0.015), rho,
            rd.number("model.eta1", -mu1), rd.number("model.eta2", -mu2));
        s.x0 = {0.0, 0.0};
    }
    else
        throw ConfigError("model.kind", "expected ou_vg or ou_wvag, got '" + kind + "'");

    s.grid.delta = rd.number("grid.delta", 0.01);
    s.grid.horizon = rd.number("grid.horizon", 50.0);
    if (rd.has("grid.inner_delta"))
        s.grid.inner_delta = rd.number("grid.inner_delta");
    else if (s.model == ModelKind::ou_wvag)
        s.grid.inner_delta = s.grid.delta / 10.0;

    s.search = parse_search(rd.text("strategy.search", s.model == ModelKind::ou_vg
                                                           ? "symmetric_d"
                                                           : "bivariate_d"));
    if (s.model == ModelKind::ou_vg)
        s.x0 = {rd.number("strategy.x0", 0.0)};
    else
        s.x0 = {rd.number("strategy.x0_1", 0.0), rd.number("strategy.x0_2", 0.0)};
    s.c = rd.number("strategy.c", 0.0);
    if (rd.has("strategy.d_lo"))
        s.d_lo = rd.number("strategy.d_lo");
    if (rd.has("strategy.d_hi"))
        s.d_hi = rd.number("strategy.d_hi");
    s.c_lo = rd.number("strategy.c_lo", 0.0);
    if (rd.has("strategy.c_hi"))
        s.c_hi = rd.number("strategy.c_hi");
    s.coarse_step = rd.number("strategy.coarse_step", 0.005);
    s.fine_step = rd.number("strategy.fine_step", 0.001);
    s.r = rd.number("strategy.r", 0.01);
    s.gamma = rd.number("strategy.gamma", 0.0);
    s.loess_span = rd.number("strategy.loess_span", 0.0);

    s.paths = rd.integer("mc.paths", 10000);
    s.seed = rd.integer("mc.seed", 1);
    s.threads = rd.integer("mc.threads", 0);

    if (rd.flag("cv.enabled", false))
    {
        CvScenario cv;
        if (rd.has("cv.p"))
            cv.p_grid = rd.integers("cv.p");
        cv.include_events = rd.flag("cv.events", true);
        cv.window = rd.number("cv.window", 0.05);
        s.cv = cv;
    }

    s.out_dir = rd.text("output.dir", ".");
    s.name = rd.text("output.name", "scenario");
    s.sample_paths = rd.integer("output.sample_paths", 5);

    s.validate();
    return s;
}

Scenario load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("config", "cannot open '" + path + "'");
    return parse_scenario(in);
}

}  // namespace levytrade
