"""
Splitting hosts into subdomain, registrable label and public suffix
====================================================================

"""

from bdi.domains import load_suffix_rules, normalize_domain, parse_url_domain

# the bundled public-suffix list, ICANN section only
rules = load_suffix_rules()
print(len(rules), "rules, checksum", rules.source_checksum[:12])

for url in ["https://www.facebook.com/login",
            "http://news.bbc.co.uk/sport",
            "https://a.b.city.kobe.jp/",
            "https://食狮.公司.cn/"]:
    p = parse_url_domain(url, rules)
    print(f"{url:<34} sub={p.subdomain!r:<10} root={p.root_domain}")

# private rules change the answer for hosted platforms
full = load_suffix_rules(include_private=True)
print(parse_url_domain("shop.example.uk.com", rules).root_domain,
      parse_url_domain("shop.example.uk.com", full).root_domain)

# identified domains are compared after normalisation
for raw in ["*.facebook.com", ".facebook.com", "WWW.Facebook.com", "m.facebook.com"]:
    print(raw, "->", normalize_domain(raw))
