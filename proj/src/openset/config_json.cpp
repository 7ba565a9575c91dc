#include "rfaug/config_json.hpp"

#include "rfaug/error.hpp"

#include <set>
#include <type_traits>

namespace rfaug::config {

namespace {

using nlohmann::json;

template <class T>
struct is_vector : std::false_type {};
template <class T>
struct is_vector<std::vector<T>> : std::true_type {};

// Reads the keys of one JSON object and rejects the ones nobody asked for.
class Fields {
public:
    Fields(const json& j, std::string where) : j_(j), where_(std::move(where))
    {
        if (!j_.is_object())
            throw ConfigError("config " + where_ + ": expected an object");
    }

    template <class T>
    void get(const char* key, T& out)
    {
        used_.insert(key);
        const auto it = j_.find(key);
        if (it == j_.end())
            return;
        if (!fits<T>(*it))
            throw ConfigError("config " + where_ + "." + key + ": wrong type");
        out = it->template get<T>();
    }

    void get(const char* key, std::optional<double>& out)
    {
        used_.insert(key);
        const auto it = j_.find(key);
        if (it == j_.end())
            return;
        if (it->is_null())
            out.reset();
        else if (it->is_number())
            out = it->get<double>();
        else
            throw ConfigError("config " + where_ + "." + key + ": wrong type");
    }

    template <class F>
    void nested(const char* key, F&& f)
    {
        used_.insert(key);
        const auto it = j_.find(key);
        if (it != j_.end())
            f(*it);
    }

    void finish() const
    {
        for (const auto& item : j_.items())
            if (!used_.count(item.key()))
                throw ConfigError("unknown config key " + where_ + "." + item.key());
    }

private:
    template <class T>
    static bool fits(const json& v)
    {
        if constexpr (std::is_same_v<T, bool>)
            return v.is_boolean();
        else if constexpr (std::is_unsigned_v<T>)
            return v.is_number_unsigned() || (v.is_number_integer() && v.template get<std::int64_t>() >= 0);
        else if constexpr (std::is_arithmetic_v<T>)
            return v.is_number();
        else if constexpr (std::is_same_v<T, std::string>)
            return v.is_string();
        else if constexpr (is_vector<T>::value) {
            if (!v.is_array())
                return false;
            for (const auto& e : v)
                if (!fits<typename T::value_type>(e))
                    return false;
            return true;
        } else
            return false;
    }

    const json& j_;
    std::string where_;
    std::set<std::string> used_;
};

std::string optimizer_name(nn::OptimizerKind k)
{
    return k == nn::OptimizerKind::adam_like ? "adam" : "sgd_momentum";
}

nn::OptimizerKind optimizer_from_name(const std::string& s)
{
    if (s == "adam")
        return nn::OptimizerKind::adam_like;
    if (s == "sgd_momentum")
        return nn::OptimizerKind::sgd_momentum;
    throw ConfigError("unknown optimizer '" + s + "' (expected adam or sgd_momentum)");
}

json method_names(const std::vector<sweep::Method>& ms)
{
    json a = json::array();
    for (auto m : ms)
        a.push_back(sweep::to_string(m));
    return a;
}

std::vector<sweep::Method> methods_from(const std::vector<std::string>& names)
{
    std::vector<sweep::Method> out;
    for (const auto& n : names)
        out.push_back(sweep::method_from_string(n));
    return out;
}

json optional_number(const std::optional<double>& v)
{
    return v ? json(*v) : json(nullptr);
}

} // namespace

json to_json(const nn::TrainConfig& c)
{
    return {{"learning_rate", c.learning_rate},
            {"batch_size", c.batch_size},
            {"epochs", c.epochs},
            {"seed", c.seed},
            {"optimizer", optimizer_name(c.optimizer)}};
}

json to_json(const gen::GenConfig& c)
{
    return {{"latent_dim", c.latent_dim}, {"beta", c.beta}, {"train", to_json(c.train)}};
}

json to_json(const latent::OptConfig& c)
{
    return {{"inner_steps", c.inner_steps},     {"inner_lr", c.inner_lr},
            {"outer_iters", c.outer_iters},     {"lambda", c.lambda},
            {"init_noise_std", c.init_noise_std}, {"count", c.count},
            {"batch_size", c.batch_size},       {"retrain_epochs", c.retrain_epochs},
            {"judge_train", to_json(c.judge_train)}, {"seed", c.seed}};
}

json to_json(const openset::OvAConfig& c)
{
    return {{"train", to_json(c.train)}, {"patience", c.patience}, {"threshold", c.threshold}};
}

json to_json(const sim::CorpusConfig& c)
{
    return {{"packets_min", c.packets_min},
            {"packets_max", c.packets_max},
            {"channel", to_string(c.channel.model)},
            {"snr_db", c.channel.snr_db},
            {"rician_k_db", c.channel.rician_k_db},
            {"seed", c.seed}};
}

json to_json(const sweep::SupervisedConfig& c)
{
    return {{"authorized", c.authorized},
            {"known_sizes", c.known_sizes},
            {"test_outliers", c.test_outliers},
            {"methods", method_names(c.methods)},
            {"seeds", c.seeds},
            {"count", c.count},
            {"gen", to_json(c.gen)},
            {"ova", to_json(c.ova)}};
}

json to_json(const sweep::BlindConfig& c)
{
    return {{"authorized_sizes", c.authorized_sizes},
            {"test_outliers", c.test_outliers},
            {"tuning_outliers", c.tuning_outliers},
            {"methods", method_names(c.methods)},
            {"delta_grid", c.delta_grid},
            {"delta", optional_number(c.delta)},
            {"seeds", c.seeds},
            {"count", c.count},
            {"autoencoder", to_json(c.autoencoder)},
            {"latent", to_json(c.latent)},
            {"ova", to_json(c.ova)}};
}

void apply(const json& j, nn::TrainConfig& c)
{
    Fields f(j, "train");
    f.get("learning_rate", c.learning_rate);
    f.get("batch_size", c.batch_size);
    f.get("epochs", c.epochs);
    f.get("seed", c.seed);
    std::string opt = optimizer_name(c.optimizer);
    f.get("optimizer", opt);
    c.optimizer = optimizer_from_name(opt);
    f.finish();
}

void apply(const json& j, gen::GenConfig& c)
{
    Fields f(j, "gen");
    f.get("latent_dim", c.latent_dim);
    f.get("beta", c.beta);
    f.nested("train", [&](const json& t) { apply(t, c.train); });
    f.finish();
}

void apply(const json& j, latent::OptConfig& c)
{
    Fields f(j, "latent");
    f.get("inner_steps", c.inner_steps);
    f.get("inner_lr", c.inner_lr);
    f.get("outer_iters", c.outer_iters);
    f.get("lambda", c.lambda);
    f.get("init_noise_std", c.init_noise_std);
    f.get("count", c.count);
    f.get("batch_size", c.batch_size);
    f.get("retrain_epochs", c.retrain_epochs);
    f.nested("judge_train", [&](const json& t) { apply(t, c.judge_train); });
    f.get("seed", c.seed);
    f.finish();
}

void apply(const json& j, openset::OvAConfig& c)
{
    Fields f(j, "ova");
    f.nested("train", [&](const json& t) { apply(t, c.train); });
    f.get("patience", c.patience);
    f.get("threshold", c.threshold);
    f.finish();
}

void apply(const json& j, sim::CorpusConfig& c)
{
    Fields f(j, "corpus");
    f.get("packets_min", c.packets_min);
    f.get("packets_max", c.packets_max);
    std::string channel = to_string(c.channel.model);
    f.get("channel", channel);
    c.channel.model = channel_model_from_string(channel);
    f.get("snr_db", c.channel.snr_db);
    f.get("rician_k_db", c.channel.rician_k_db);
    f.get("seed", c.seed);
    f.finish();
}

void apply(const json& j, sweep::SupervisedConfig& c)
{
    Fields f(j, "supervised");
    f.get("authorized", c.authorized);
    f.get("known_sizes", c.known_sizes);
    f.get("test_outliers", c.test_outliers);
    std::vector<std::string> methods;
    f.get("methods", methods);
    if (!methods.empty())
        c.methods = methods_from(methods);
    f.get("seeds", c.seeds);
    f.get("count", c.count);
    f.nested("gen", [&](const json& t) { apply(t, c.gen); });
    f.nested("ova", [&](const json& t) { apply(t, c.ova); });
    f.finish();
}

void apply(const json& j, sweep::BlindConfig& c)
{
    Fields f(j, "blind");
    f.get("authorized_sizes", c.authorized_sizes);
    f.get("test_outliers", c.test_outliers);
    f.get("tuning_outliers", c.tuning_outliers);
    std::vector<std::string> methods;
    f.get("methods", methods);
    if (!methods.empty())
        c.methods = methods_from(methods);
    f.get("delta_grid", c.delta_grid);
    f.get("delta", c.delta);
    f.get("seeds", c.seeds);
    f.get("count", c.count);
    f.nested("autoencoder", [&](const json& t) { apply(t, c.autoencoder); });
    f.nested("latent", [&](const json& t) { apply(t, c.latent); });
    f.nested("ova", [&](const json& t) { apply(t, c.ova); });
    f.finish();
}

} // namespace rfaug::config
