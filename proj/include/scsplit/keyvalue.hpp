#pragma once

#include "error.hpp"
#include "numeric.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace scsplit
{

/// Line-oriented `key=value` text with optional `[section]` headers and `#`
/// comments. Lines that are neither are kept verbatim as data lines (used for
/// coefficient rows in scheme files). Keys before the first header live in
/// the section "".
class KeyValueDocument
{
public:
	struct DataLine
	{
		std::string section;
		std::string text;
		int line = 0;
	};

	static KeyValueDocument parse(std::string_view text)
	{
		KeyValueDocument doc;
		std::string section;
		std::istringstream in{std::string(text)};
		std::string raw;
		int lineno = 0;
		while(std::getline(in, raw))
		{
			++lineno;
			const auto line = trim(raw);
			if(line.empty() || line.front() == '#')
			{
				continue;
			}
			if(line.front() == '[')
			{
				if(line.back() != ']')
				{
					throw ParseError("line " + std::to_string(lineno) + ": unterminated section header");
				}
				section = std::string(trim(line.substr(1, line.size() - 2)));
				doc.sections_.push_back(section);
				continue;
			}
			const auto eq = line.find('=');
			if(eq == std::string_view::npos)
			{
				doc.data_.push_back({section, std::string(line), lineno});
				continue;
			}
			std::string key(trim(line.substr(0, eq)));
			if(key.empty())
			{
				throw ParseError("line " + std::to_string(lineno) + ": empty key");
			}
			auto [it, fresh] = doc.values_.try_emplace({section, key}, std::string(trim(line.substr(eq + 1))));
			if(!fresh)
			{
				throw ParseError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
			}
			doc.order_.push_back({section, key});
		}
		return doc;
	}

	static KeyValueDocument load(const std::filesystem::path& path)
	{
		std::ifstream in(path);
		if(!in)
		{
			throw ValidationError("cannot open '" + path.string() + "'");
		}
		std::stringstream buf;
		buf << in.rdbuf();
		return parse(buf.str());
	}

	[[nodiscard]] std::optional<std::string> get(std::string_view section, std::string_view key) const
	{
		const auto it = values_.find({std::string(section), std::string(key)});
		if(it == values_.end())
		{
			return std::nullopt;
		}
		return it->second;
	}

	[[nodiscard]] std::string require(std::string_view section, std::string_view key) const
	{
		auto v = get(section, key);
		if(!v)
		{
			std::string where = section.empty() ? std::string() : "[" + std::string(section) + "] ";
			throw ValidationError("missing key " + where + std::string(key));
		}
		return *v;
	}

	/// Keys in file order, as (section, key).
	[[nodiscard]] const std::vector<std::pair<std::string, std::string>>& keys() const { return order_; }
	[[nodiscard]] const std::vector<DataLine>& data_lines() const { return data_; }
	[[nodiscard]] const std::vector<std::string>& sections() const { return sections_; }

private:
	std::map<std::pair<std::string, std::string>, std::string> values_;
	std::vector<std::pair<std::string, std::string>> order_;
	std::vector<DataLine> data_;
	std::vector<std::string> sections_;
};

} // namespace scsplit
