from schottkyzeta.geometry.schottky import build_from_spec, schottky_disks
from schottkyzeta.geometry.words import (
    build_class_table,
    build_length_cache,
    load_class_tables,
    save_class_tables,
)

group = build_from_spec("Y:12,12,pi/2")

for disk in schottky_disks(group):
    print(f"center={disk.center:.6g} radius={disk.radius:.6g}")

# class tables only depend on the number of generators and can be shared
tables = {n: build_class_table(group.r, n) for n in range(1, 9)}
save_class_tables([tables[n] for n in range(1, 9)], "./two_generator_tables.txt")

cache = build_length_cache(
    group, 8, tables=load_class_tables("./two_generator_tables.txt")
)
cache.save("./y1212.cache")

for n in range(1, cache.n_max + 1):
    entry = cache.entry(n)
    print(
        f"n={n} classes={len(entry.lengths)} words={entry.total} shortest={entry.lengths[0]:.6f}"
    )
