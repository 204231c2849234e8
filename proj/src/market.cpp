#include "econsim/market.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "econsim/errors.hpp"

namespace econsim {

std::string_view to_string(Side s) { return s == Side::Buy ? "buy" : "sell"; }

LiquidityPool::LiquidityPool(CommodityId commodity, Units inventory_supply, Currency currency_reserve)
    : commodity_(commodity), inventory_(inventory_supply) {
    if (inventory_supply <= 0 || currency_reserve <= Currency{}) {
        throw std::invalid_argument("pool reserves must be positive");
    }
    k_ = static_cast<__int128>(inventory_supply) * currency_reserve.raw();
}

Currency LiquidityPool::reserve_at(Units is) const {
    if (is <= 0) throw InsufficientLiquidity("pool inventory would reach zero");
    const __int128 cr = (k_ + is / 2) / is;
    if (cr <= 0) throw InsufficientLiquidity("pool currency reserve would reach zero");
    if (cr > std::numeric_limits<std::int64_t>::max()) throw InsufficientLiquidity("pool currency reserve overflow");
    return Currency::from_raw(static_cast<std::int64_t>(cr));
}

double LiquidityPool::invariant_error() const {
    const __int128 prod = static_cast<__int128>(inventory_) * currency_reserve().raw();
    const __int128 err = prod > k_ ? prod - k_ : k_ - prod;
    return static_cast<double>(err) / static_cast<double>(k_);
}

double LiquidityPool::quote() const {
    return currency_reserve().to_double() / static_cast<double>(inventory_);
}

Currency LiquidityPool::buy_cost(Units q) const {
    if (q <= 0) throw NonPositiveQuantity("trade quantity must be positive");
    if (q >= inventory_) {
        throw InsufficientLiquidity(fmt::format("cannot buy {} of {} pooled units", q, inventory_));
    }
    return reserve_at(inventory_ - q) - currency_reserve();
}

Currency LiquidityPool::sell_proceeds(Units q) const {
    if (q <= 0) throw NonPositiveQuantity("trade quantity must be positive");
    if (q > std::numeric_limits<Units>::max() - inventory_) throw InsufficientLiquidity("pool inventory overflow");
    return currency_reserve() - reserve_at(inventory_ + q);
}

void LiquidityPool::remove_inventory(Units q) { inventory_ -= q; }
void LiquidityPool::add_inventory(Units q) { inventory_ += q; }

double quote(const LiquidityPool& pool) { return pool.quote(); }

namespace {

Currency fee_for(Currency amount, double fee_rate) {
    if (fee_rate <= 0.0) return Currency{};
    return Currency::from_raw(static_cast<std::int64_t>(std::llround(static_cast<double>(amount.raw()) * fee_rate)));
}

}  // namespace

TradeReceipt execute_buy(LiquidityPool& pool, Units quantity, AgentState& buyer, MoneyLedger& ledger,
                         Duration timestamp, double fee_rate) {
    const Currency cost = pool.buy_cost(quantity);
    const Currency fee = fee_for(cost, fee_rate);
    if (buyer.balance < cost + fee) {
        throw InsufficientFunds(fmt::format("buying {} units costs {:.4f}, balance {:.4f}", quantity,
                                            (cost + fee).to_double(), buyer.balance.to_double()));
    }
    TradeReceipt r;
    r.commodity = pool.commodity();
    r.side = Side::Buy;
    r.quantity = quantity;
    r.marginal_price_pre = pool.quote();
    pool.remove_inventory(quantity);
    r.marginal_price_post = pool.quote();
    r.currency_delta = cost;
    r.fee = fee;
    r.effective_price = cost.to_double() / static_cast<double>(quantity);
    r.timestamp = timestamp;
    r.agent_id = buyer.id;

    buyer.balance -= cost + fee;
    buyer.inventory[pool.commodity().index] += quantity;
    ledger.burned_by_purchases += cost;
    ledger.fees_collected += fee;
    return r;
}

TradeReceipt execute_sell(LiquidityPool& pool, Units quantity, AgentState& seller, MoneyLedger& ledger,
                          Duration timestamp, double fee_rate) {
    if (quantity <= 0) throw NonPositiveQuantity("trade quantity must be positive");
    if (seller.held(pool.commodity()) < quantity) {
        throw InsufficientInventory(
            fmt::format("selling {} units but only {} held", quantity, seller.held(pool.commodity())));
    }
    const Currency proceeds = pool.sell_proceeds(quantity);
    const Currency fee = fee_for(proceeds, fee_rate);
    TradeReceipt r;
    r.commodity = pool.commodity();
    r.side = Side::Sell;
    r.quantity = quantity;
    r.marginal_price_pre = pool.quote();
    pool.add_inventory(quantity);
    r.marginal_price_post = pool.quote();
    r.currency_delta = proceeds;
    r.fee = fee;
    r.effective_price = proceeds.to_double() / static_cast<double>(quantity);
    r.timestamp = timestamp;
    r.agent_id = seller.id;

    seller.inventory[pool.commodity().index] -= quantity;
    seller.balance += proceeds - fee;
    ledger.minted_by_sales += proceeds;
    ledger.fees_collected += fee;
    return r;
}

PriceIndexSnapshot compute_price_index(std::span<const PriceObservation> observations) {
    PriceIndexSnapshot s;
    double log_food = 0.0;
    double log_nonfood = 0.0;
    for (const auto& o : observations) {
        if (!(o.initial > 0.0) || !(o.current > 0.0)) throw std::invalid_argument("prices must be positive");
        const double pcr = o.current / o.initial;
        s.pcr.push_back(pcr);
        if (o.is_food) {
            log_food += std::log(pcr);
            ++s.n_food;
        } else {
            log_nonfood += std::log(pcr);
            ++s.n_nonfood;
        }
    }
    const std::size_t n = s.n_food + s.n_nonfood;
    if (n == 0) return s;
    s.pcr_food = s.n_food > 0 ? std::exp(log_food / static_cast<double>(s.n_food)) : 1.0;
    s.pcr_nonfood = s.n_nonfood > 0 ? std::exp(log_nonfood / static_cast<double>(s.n_nonfood)) : 1.0;
    s.pcr_overall = (static_cast<double>(s.n_food) * s.pcr_food + static_cast<double>(s.n_nonfood) * s.pcr_nonfood) /
                    static_cast<double>(n);
    return s;
}

Market::Market(const WorldConfig& cfg) : fee_rate_(cfg.params.fee_rate) {
    pools_.resize(cfg.commodities.size());
    initial_reserves_.resize(cfg.commodities.size());
    for (std::size_t i = 0; i < cfg.commodities.size(); ++i) {
        const auto& c = cfg.commodities[i];
        if (!c.pooled()) continue;
        const Currency reserve = Currency::from_double(c.initial_price * static_cast<double>(c.initial_pool_inventory));
        pools_[i].emplace(CommodityId{static_cast<std::uint16_t>(i)}, c.initial_pool_inventory, reserve);
        initial_reserves_[i] = pools_[i]->currency_reserve();
    }
}

LiquidityPool* Market::pool(CommodityId c) {
    if (c.index >= pools_.size() || !pools_[c.index]) return nullptr;
    return &*pools_[c.index];
}

const LiquidityPool* Market::pool(CommodityId c) const {
    if (c.index >= pools_.size() || !pools_[c.index]) return nullptr;
    return &*pools_[c.index];
}

std::optional<double> Market::quote(CommodityId c) const {
    const LiquidityPool* p = pool(c);
    return p ? std::optional<double>(p->quote()) : std::nullopt;
}

Quotes Market::quotes() const {
    Quotes q(pools_.size());
    for (std::size_t i = 0; i < pools_.size(); ++i) {
        if (pools_[i]) q[i] = pools_[i]->quote();
    }
    return q;
}

TradeReceipt Market::buy(CommodityId c, Units quantity, AgentState& buyer, Duration timestamp) {
    LiquidityPool* p = pool(c);
    if (!p) throw InvalidAction("commodity has no market");
    return execute_buy(*p, quantity, buyer, ledger_, timestamp, fee_rate_);
}

TradeReceipt Market::sell(CommodityId c, Units quantity, AgentState& seller, Duration timestamp) {
    LiquidityPool* p = pool(c);
    if (!p) throw InvalidAction("commodity has no market");
    return execute_sell(*p, quantity, seller, ledger_, timestamp, fee_rate_);
}

PriceIndexSnapshot Market::price_index(const WorldConfig& cfg) const {
    std::vector<PriceObservation> obs;
    for (std::size_t i = 0; i < pools_.size(); ++i) {
        if (!pools_[i]) continue;
        const auto& c = cfg.commodities[i];
        obs.push_back({pools_[i]->quote(), c.initial_price, c.is_food});
    }
    return compute_price_index(obs);
}

Currency Market::reserve_drawdown() const {
    Currency total;
    for (std::size_t i = 0; i < pools_.size(); ++i) {
        if (pools_[i]) total += initial_reserves_[i] - pools_[i]->currency_reserve();
    }
    return total;
}

Currency Market::total_reserves() const {
    Currency total;
    for (const auto& p : pools_) {
        if (p) total += p->currency_reserve();
    }
    return total;
}

}  // namespace econsim
