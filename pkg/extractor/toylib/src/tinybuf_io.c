#include <stdio.h>

#include "tinybuf.h"

int tb_write_file(const tinybuf *buf, const char *path)
{
    FILE *out = fopen(path, "wb");
    size_t len = tb_len(buf);
    if (!out)
        return -1;
    if (len && fwrite(tb_data(buf), 1, len, out) != len) {
        fclose(out);
        return -1;
    }
    return fclose(out) == 0 ? 0 : -1;
}

int tb_read_file(tinybuf *buf, const char *path)
{
    FILE *in = fopen(path, "rb");
    char chunk[256];
    size_t got;
    if (!in)
        return -1;
    while ((got = fread(chunk, 1, sizeof(chunk), in)) > 0) {
        if (tb_push(buf, chunk, got) != 0) {
            fclose(in);
            return -1;
        }
    }
    fclose(in);
    return 0;
}
