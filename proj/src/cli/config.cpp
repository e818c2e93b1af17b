#include "tarn/cli/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace tarn::cli {

namespace pt = boost::property_tree;

namespace {

std::string trim(std::string_view s)
{
    const auto hash = s.find('#');
    if (hash != std::string_view::npos)
        s = s.substr(0, hash);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return std::string(s);
}

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

double to_double(const std::string& text, const std::string& field)
{
    double value = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    if (!text.empty() && *first == '+')
        ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || text.empty())
        throw ConfigError(field + ": expected a number, got '" + text + "'");
    return value;
}

std::vector<std::string> split_list(const std::string& text)
{
    std::vector<std::string> items;
    std::string current;
    std::istringstream in(text);
    while (std::getline(in, current, ','))
        if (auto item = trim(current); !item.empty())
            items.push_back(std::move(item));
    return items;
}

/// One [section]; remembers which keys were read so leftovers can be reported.
class Section
{
public:
    Section(std::string name, const pt::ptree* tree) : m_name(std::move(name)), m_tree(tree) {}

    std::optional<std::string> raw(const std::string& key)
    {
        if (!m_tree)
            return std::nullopt;
        const auto child = m_tree->get_child_optional(pt::ptree::path_type(key, '\0'));
        if (!child)
            return std::nullopt;
        m_used.insert(key);
        return trim(child->data());
    }

    std::string field(const std::string& key) const { return m_name + "." + key; }

    std::optional<double> number(const std::string& key)
    {
        const auto text = raw(key);
        return text ? std::optional<double>(to_double(*text, field(key))) : std::nullopt;
    }

    std::optional<long long> integer(const std::string& key)
    {
        const auto value = number(key);
        if (!value)
            return std::nullopt;
        if (std::floor(*value) != *value || std::abs(*value) > 9.0e15)
            throw ConfigError(field(key) + ": expected an integer");
        return static_cast<long long>(*value);
    }

    std::optional<bool> flag(const std::string& key)
    {
        const auto text = raw(key);
        if (!text)
            return std::nullopt;
        const auto v = lower(*text);
        if (v == "true" || v == "yes" || v == "on" || v == "1")
            return true;
        if (v == "false" || v == "no" || v == "off" || v == "0")
            return false;
        throw ConfigError(field(key) + ": expected true or false, got '" + *text + "'");
    }

    std::optional<std::vector<double>> numbers(const std::string& key)
    {
        const auto text = raw(key);
        if (!text)
            return std::nullopt;
        std::vector<double> out;
        for (const auto& item : split_list(*text))
            out.push_back(to_double(item, field(key)));
        return out;
    }

    std::optional<std::vector<std::string>> words(const std::string& key)
    {
        const auto text = raw(key);
        return text ? std::optional(split_list(*text)) : std::nullopt;
    }

    void unknown_keys(std::vector<std::string>& out) const
    {
        if (!m_tree)
            return;
        for (const auto& [key, _] : *m_tree)
            if (!m_used.contains(key))
                out.push_back(field(key));
    }

private:
    std::string m_name;
    const pt::ptree* m_tree;
    std::set<std::string> m_used;
};

Direction parse_direction(const std::string& text, const std::string& field)
{
    const auto v = lower(text);
    if (v == "1" || v == "+1" || v == "buy")
        return Direction::Buy;
    if (v == "-1" || v == "sell")
        return Direction::Sell;
    throw ConfigError(field + ": expected buy/+1 or sell/-1, got '" + text + "'");
}

std::vector<double> regular_schedule(long long count, double interval_days, double days_per_year)
{
    std::vector<double> times;
    for (long long k = 1; k <= count; ++k)
        times.push_back(static_cast<double>(k) * interval_days / days_per_year);
    return times;
}

PiecewiseConstant parse_curve(Section& s, const std::string& key, double fallback)
{
    const auto values = s.numbers(key);
    const auto knots = s.numbers(key + "_knots");
    try {
        if (!values)
            return PiecewiseConstant(fallback);
        if (!knots) {
            if (values->size() != 1)
                throw ConfigError(s.field(key) + ": several values need " + s.field(key + "_knots"));
            return PiecewiseConstant(values->front());
        }
        return PiecewiseConstant(*knots, *values);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(s.field(key) + ": " + e.what());
    }
}

template <typename F>
void wrap(const std::string& field, F&& f)
{
    try {
        f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(field + ": " + e.what());
    }
}

} // namespace

std::vector<PricingCase> RunConfig::cases() const
{
    std::vector<PricingCase> out;
    for (auto k : knockouts)
        for (double u : targets)
            out.push_back({k, u});
    return out;
}

TarnContract RunConfig::contract_for(const PricingCase& c) const
{
    TarnContract out = contract;
    out.knockout = c.knockout;
    out.target = c.target;
    return out;
}

void RunConfig::validate() const
{
    if (!run_fd && !run_mc)
        throw ConfigError("engines.run: at least one engine must be enabled");
    if (knockouts.empty())
        throw ConfigError("contract.knockout: at least one knockout type is required");
    if (targets.empty())
        throw ConfigError("contract.target: at least one target is required");
    if (!(spot > 0.0))
        throw ConfigError("model.spot: spot must be positive");
    wrap("contract", [&] {
        for (const auto& c : cases())
            contract_for(c).validate();
    });
    wrap("model", [&] { tarn::validate(model.vol); });
    wrap("fd", [&] { fd.validate(); });
    wrap("fd.time_steps", [&] {
        if (fd.time_steps < static_cast<int>(contract.fixing_count()))
            throw std::invalid_argument("time_steps must be at least the number of fixings");
    });
    wrap("mc", [&] { mc.validate(); });
}

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir)
{
    pt::ptree tree;
    try {
        std::istringstream in{std::string(text)};
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("config syntax: " + e.message() + " (line " + std::to_string(e.line()) + ")");
    }

    static const std::vector<std::string> known = {"contract", "model", "engines", "fd", "mc", "output"};
    std::vector<std::string> unknown;
    for (const auto& [name, child] : tree)
        if (std::find(known.begin(), known.end(), name) == known.end())
            unknown.push_back(child.empty() ? name : "[" + name + "]");

    std::map<std::string, Section> sections;
    for (const auto& name : known) {
        const auto child = tree.get_child_optional(name);
        sections.emplace(name, Section(name, child ? &*child : nullptr));
    }
    auto& contract = sections.at("contract");
    auto& model = sections.at("model");
    auto& engines = sections.at("engines");
    auto& fd = sections.at("fd");
    auto& mc = sections.at("mc");
    auto& output = sections.at("output");

    RunConfig cfg;
    cfg.contract.strike = contract.number("strike").value_or(1.0);
    if (auto t = contract.numbers("target"))
        cfg.targets = *t;
    if (auto k = contract.words("knockout")) {
        for (const auto& w : *k)
            wrap(contract.field("knockout"), [&] { cfg.knockouts.push_back(parse_knockout(w)); });
    } else {
        cfg.knockouts = {KnockoutType::FullGain};
    }
    if (auto b = contract.raw("beta"))
        cfg.contract.beta = parse_direction(*b, contract.field("beta"));
    const auto explicit_times = contract.numbers("fixing_times");
    const auto count = contract.integer("fixing_count");
    const double interval = contract.number("fixing_interval_days").value_or(preset_fixing_interval_days);
    const double year = contract.number("days_per_year").value_or(preset_days_per_year);
    if (explicit_times && count)
        throw ConfigError("contract: give either fixing_times or fixing_count, not both");
    if (explicit_times)
        cfg.contract.fixing_times = *explicit_times;
    else if (count) {
        if (*count < 1)
            throw ConfigError("contract.fixing_count: must be at least 1");
        cfg.contract.fixing_times = regular_schedule(*count, interval, year);
    } else
        throw ConfigError("contract: fixing_times or fixing_count is required");
    if (auto extra = contract.numbers("extra_payments"))
        cfg.contract.extra_payments = *extra;
    for (double u : cfg.targets)
        if (!(u > 0.0))
            throw ConfigError("contract.target: target must be positive");
    if (!cfg.contract.extra_payments.empty() && cfg.contract.extra_payments.size() != cfg.contract.fixing_count())
        throw ConfigError("contract.extra_payments: length mismatch, expected " +
                          std::to_string(cfg.contract.fixing_count()) + " entries, got " +
                          std::to_string(cfg.contract.extra_payments.size()));

    cfg.spot = model.number("spot").value_or(1.0);
    cfg.model.domestic = parse_curve(model, "rd", 0.0);
    cfg.model.foreign = parse_curve(model, "rf", 0.0);
    const auto vol_values = model.numbers("vol");
    const auto vol_knots = model.numbers("vol_knots");
    if (auto file = model.raw("local_vol_file")) {
        if (vol_values || vol_knots)
            throw ConfigError("model: local_vol_file excludes vol and vol_knots");
        std::filesystem::path path(*file);
        if (path.is_relative() && !base_dir.empty())
            path = base_dir / path;
        cfg.local_vol_file = path.string();
        wrap(model.field("local_vol_file"), [&] { cfg.model.vol = load_local_vol_matrix(path); });
    } else if (vol_values && vol_knots) {
        wrap(model.field("vol"), [&] { cfg.model.vol = TermStructureVol{PiecewiseConstant(*vol_knots, *vol_values)}; });
    } else if (vol_values) {
        if (vol_values->size() != 1)
            throw ConfigError("model.vol: several values need model.vol_knots");
        cfg.model.vol = ConstantVol{vol_values->front()};
    } else {
        cfg.model.vol = ConstantVol{0.2};
    }

    if (auto run = engines.words("run")) {
        cfg.run_fd = cfg.run_mc = false;
        for (const auto& w : *run) {
            const auto e = lower(w);
            if (e == "fd")
                cfg.run_fd = true;
            else if (e == "mc")
                cfg.run_mc = true;
            else
                throw ConfigError("engines.run: unknown engine '" + w + "'");
        }
    }

    auto as_int = [](long long v, const std::string& field) {
        if (v < 0 || v > 1'000'000'000)
            throw ConfigError(field + ": out of range");
        return static_cast<int>(v);
    };
    if (auto v = fd.integer("spot_nodes"))
        cfg.fd.spot_nodes = as_int(*v, fd.field("spot_nodes"));
    if (auto v = fd.integer("accumulation_nodes"))
        cfg.fd.accumulation_nodes = as_int(*v, fd.field("accumulation_nodes"));
    if (auto v = fd.integer("time_steps"))
        cfg.fd.time_steps = as_int(*v, fd.field("time_steps"));
    cfg.fd.theta = fd.number("theta").value_or(cfg.fd.theta);
    cfg.fd.domain_width_sigmas = fd.number("domain_width_sigmas").value_or(cfg.fd.domain_width_sigmas);
    if (auto p = fd.raw("pin_policy")) {
        const auto v = lower(*p);
        if (v == "strike_and_spot")
            cfg.fd.pin_policy = fd::PinPolicy::StrikeAndSpot;
        else if (v == "strike_only")
            cfg.fd.pin_policy = fd::PinPolicy::StrikeOnlyThenInterpolate;
        else
            throw ConfigError("fd.pin_policy: expected strike_and_spot or strike_only");
    }
    if (auto b = fd.raw("boundary")) {
        const auto v = lower(*b);
        if (v == "zero_gamma")
            cfg.fd.boundary = fd::BoundaryCondition::ZeroGamma;
        else if (v == "dirichlet_neumann")
            cfg.fd.boundary = fd::BoundaryCondition::DirichletNeumannByDirection;
        else
            throw ConfigError("fd.boundary: expected zero_gamma or dirichlet_neumann");
    }
    cfg.fd.implicit_startup = fd.flag("implicit_startup").value_or(false);
    cfg.fd.smooth_jumps = fd.flag("smooth_jumps").value_or(true);
    cfg.refine = fd.flag("refine").value_or(false);
    cfg.convergence = fd.flag("convergence").value_or(false);

    if (auto v = mc.integer("paths")) {
        if (*v < 2)
            throw ConfigError("mc.paths: must be at least 2");
        cfg.mc.paths = static_cast<std::size_t>(*v);
    }
    if (auto v = mc.integer("seed")) {
        if (*v < 0)
            throw ConfigError("mc.seed: must be non-negative");
        cfg.mc.seed = static_cast<std::uint64_t>(*v);
    }
    if (auto v = mc.integer("substeps"))
        cfg.mc.substeps = as_int(*v, mc.field("substeps"));
    cfg.mc.control_variate = mc.flag("control_variate").value_or(has_exact_transition(cfg.model.vol));
    if (auto c = mc.raw("cv_coefficient")) {
        const auto v = lower(*c);
        if (v == "pilot")
            cfg.mc.coefficient = mc::CvCoefficient::Pilot;
        else if (v == "unit")
            cfg.mc.coefficient = mc::CvCoefficient::Unit;
        else
            throw ConfigError("mc.cv_coefficient: expected pilot or unit");
    }
    cfg.mc.pilot_fraction = mc.number("pilot_fraction").value_or(cfg.mc.pilot_fraction);

    if (auto f = output.raw("format")) {
        const auto v = lower(*f);
        if (v == "human")
            cfg.format = OutputFormat::Human;
        else if (v == "records")
            cfg.format = OutputFormat::Records;
        else
            throw ConfigError("output.format: expected human or records");
    }
    cfg.destination = output.raw("path").value_or("-");

    for (const auto& [_, section] : sections)
        section.unknown_keys(unknown);
    if (!unknown.empty()) {
        std::string list;
        for (const auto& u : unknown)
            list += (list.empty() ? "" : ", ") + u;
        throw ConfigError("unknown keys: " + list);
    }
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read config file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), path.parent_path());
}

RunConfig table1_preset()
{
    RunConfig cfg;
    cfg.contract.strike = 1.0;
    cfg.contract.beta = Direction::Buy;
    cfg.contract.fixing_times = regular_schedule(20, preset_fixing_interval_days, preset_days_per_year);
    cfg.knockouts = {KnockoutType::NoGain, KnockoutType::PartGain, KnockoutType::FullGain};
    cfg.targets = {0.3, 0.5, 0.7, 0.9};
    cfg.spot = 1.05;
    cfg.model.domestic = PiecewiseConstant(0.0);
    cfg.model.foreign = PiecewiseConstant(0.0);
    cfg.model.vol = ConstantVol{0.2};
    cfg.run_fd = true;
    cfg.run_mc = true;
    cfg.fd.spot_nodes = 500;
    cfg.fd.accumulation_nodes = 100;
    cfg.fd.time_steps = 500;
    cfg.mc.paths = 200'000;
    cfg.format = OutputFormat::Human;
    return cfg;
}

namespace {

nlohmann::ordered_json curve_json(const PiecewiseConstant& c)
{
    return {{"ends", c.ends()}, {"values", c.values()}};
}

nlohmann::ordered_json vol_json(const VolatilitySpec& vol)
{
    if (const auto* v = std::get_if<ConstantVol>(&vol))
        return {{"constant", v->sigma}};
    if (const auto* v = std::get_if<TermStructureVol>(&vol))
        return {{"term", curve_json(v->sigma)}};
    const auto& s = std::get<LocalVolSurface>(vol);
    return {{"local",
             {{"spots", std::vector<double>(s.spots.data(), s.spots.data() + s.spots.size())},
              {"times", std::vector<double>(s.times.data(), s.times.data() + s.times.size())},
              {"sigma", std::vector<double>(s.sigma.data(), s.sigma.data() + s.sigma.size())}}}};
}

} // namespace

std::string fingerprint(const RunConfig& config)
{
    nlohmann::ordered_json j;
    j["contract"] = {{"strike", config.contract.strike},
                     {"beta", static_cast<int>(config.contract.beta)},
                     {"fixing_times", config.contract.fixing_times},
                     {"extra_payments", config.contract.extra_payments}};
    std::vector<std::string> knockouts;
    for (auto k : config.knockouts)
        knockouts.emplace_back(to_string(k));
    j["cases"] = {{"knockouts", knockouts}, {"targets", config.targets}};
    j["model"] = {{"spot", config.spot},
                  {"rd", curve_json(config.model.domestic)},
                  {"rf", curve_json(config.model.foreign)},
                  {"vol", vol_json(config.model.vol)}};
    j["engines"] = {{"fd", config.run_fd}, {"mc", config.run_mc}, {"refine", config.refine},
                    {"convergence", config.convergence}};
    const auto& f = config.fd;
    j["fd"] = {{"M", f.spot_nodes},
               {"J", f.accumulation_nodes},
               {"N", f.time_steps},
               {"theta", f.theta},
               {"width", f.domain_width_sigmas},
               {"pin", static_cast<int>(f.pin_policy)},
               {"boundary", static_cast<int>(f.boundary)},
               {"refinement", f.refinement},
               {"implicit_startup", f.implicit_startup},
               {"smooth_jumps", f.smooth_jumps}};
    const auto& m = config.mc;
    j["mc"] = {{"paths", m.paths},
               {"seed", m.seed},
               {"substeps", m.substeps},
               {"cv", m.control_variate},
               {"coefficient", static_cast<int>(m.coefficient)},
               {"pilot_fraction", m.pilot_fraction}};

    // FNV-1a, 64 bit.
    std::uint64_t hash = 14695981039346656037ull;
    for (unsigned char c : j.dump()) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

} // namespace tarn::cli
