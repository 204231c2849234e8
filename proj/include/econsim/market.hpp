#pragma once

#include <optional>
#include <span>
#include <vector>

#include "econsim/agent.hpp"
#include "econsim/config.hpp"
#include "econsim/types.hpp"

namespace econsim {

/// Constant-product pool pairing one commodity with currency.
///
/// The currency reserve is not stored: it is the pure function
/// CR(IS) = round(k / IS) of the inventory supply, with k an exact 128-bit
/// integer fixed at construction. Every trade therefore costs exactly
/// CR(IS') - CR(IS), trades telescope, and k never drifts.
class LiquidityPool {
public:
    LiquidityPool(CommodityId commodity, Units inventory_supply, Currency currency_reserve);

    [[nodiscard]] CommodityId commodity() const { return commodity_; }
    [[nodiscard]] Units inventory_supply() const { return inventory_; }
    [[nodiscard]] Currency currency_reserve() const { return reserve_at(inventory_); }
    [[nodiscard]] __int128 invariant() const { return k_; }
    /// |IS * CR - k| / k for the current reserves.
    [[nodiscard]] double invariant_error() const;

    /// Marginal price CR / IS.
    [[nodiscard]] double quote() const;

    [[nodiscard]] Currency reserve_at(Units inventory_supply) const;
    /// Currency a buyer pays for q units (throws on invalid q).
    [[nodiscard]] Currency buy_cost(Units q) const;
    /// Currency a seller receives for q units.
    [[nodiscard]] Currency sell_proceeds(Units q) const;

    void remove_inventory(Units q);
    void add_inventory(Units q);

private:
    CommodityId commodity_;
    Units inventory_ = 0;
    __int128 k_ = 0;
};

enum class Side { Buy, Sell };
std::string_view to_string(Side s);

struct TradeReceipt {
    CommodityId commodity;
    Side side = Side::Buy;
    Units quantity = 0;        // |delta IS|
    Currency currency_delta;   // |delta CR|
    Currency fee;
    double effective_price = 0.0;  // currency_delta / quantity
    double marginal_price_pre = 0.0;
    double marginal_price_post = 0.0;
    Duration timestamp;
    AgentId agent_id = 0;
};

/// Audit trail of the elastic money supply. Currency leaves circulation when
/// agents buy from pools or pay fees and enters when they sell, earn wages.
struct MoneyLedger {
    Currency minted_by_sales;
    Currency burned_by_purchases;
    Currency wages_paid;
    Currency fees_collected;  // doctor, tuition and trading fees
    Units subsidy_units = 0;  // goods granted outside the pools

    /// Net change in circulating (agent-held) currency since initialization.
    [[nodiscard]] Currency circulation_change() const {
        return minted_by_sales - burned_by_purchases + wages_paid - fees_collected;
    }
};

double quote(const LiquidityPool& pool);

/// Buy q units out of the pool: currency is burned from the buyer.
TradeReceipt execute_buy(LiquidityPool& pool, Units quantity, AgentState& buyer, MoneyLedger& ledger,
                         Duration timestamp, double fee_rate = 0.0);
/// Sell q units into the pool: currency is minted to the seller.
TradeReceipt execute_sell(LiquidityPool& pool, Units quantity, AgentState& seller, MoneyLedger& ledger,
                          Duration timestamp, double fee_rate = 0.0);

struct PriceObservation {
    double current = 0.0;
    double initial = 0.0;
    bool is_food = false;
};

struct PriceIndexSnapshot {
    std::vector<double> pcr;  // per observation, p(t) / p(0)
    double pcr_food = 1.0;
    double pcr_nonfood = 1.0;
    double pcr_overall = 1.0;
    std::size_t n_food = 0;
    std::size_t n_nonfood = 0;
};

/// Category geometric means combined by their share of commodity types.
PriceIndexSnapshot compute_price_index(std::span<const PriceObservation> observations);

/// All pools of a world plus the money ledger.
class Market {
public:
    Market() = default;
    explicit Market(const WorldConfig& cfg);

    [[nodiscard]] LiquidityPool* pool(CommodityId c);
    [[nodiscard]] const LiquidityPool* pool(CommodityId c) const;
    [[nodiscard]] std::optional<double> quote(CommodityId c) const;
    [[nodiscard]] Quotes quotes() const;

    TradeReceipt buy(CommodityId c, Units quantity, AgentState& buyer, Duration timestamp);
    TradeReceipt sell(CommodityId c, Units quantity, AgentState& seller, Duration timestamp);

    [[nodiscard]] PriceIndexSnapshot price_index(const WorldConfig& cfg) const;

    [[nodiscard]] const MoneyLedger& ledger() const { return ledger_; }
    [[nodiscard]] MoneyLedger& ledger() { return ledger_; }

    /// Sum of CR_i(0) - CR_i(t); equals minted - burned when no fees apply.
    [[nodiscard]] Currency reserve_drawdown() const;
    [[nodiscard]] Currency total_reserves() const;
    [[nodiscard]] const std::vector<std::optional<LiquidityPool>>& pools() const { return pools_; }

private:
    std::vector<std::optional<LiquidityPool>> pools_;  // indexed by commodity
    std::vector<Currency> initial_reserves_;
    double fee_rate_ = 0.0;
    MoneyLedger ledger_;
};

}  // namespace econsim
