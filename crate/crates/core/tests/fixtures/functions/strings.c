#include <string.h>
#include <ctype.h>

enum token_kind { TK_WORD, TK_NUMBER, TK_PUNCT, TK_END };

struct token {
    enum token_kind kind;
    const char *start;
    int len;
};

static const char *skip_space(const char *p)
{
    while (*p == ' ' || *p == '\t' || *p == '\n')
        p++;
    return p;
}

struct token next_token(const char **cursor)
{
    struct token t;
    const char *p = skip_space(*cursor);
    t.start = p;
    if (*p == '\0') {
        t.kind = TK_END;
        t.len = 0;
    } else if (isdigit((unsigned char)*p)) {
        while (isdigit((unsigned char)*p) || *p == '.')
            p++;
        t.kind = TK_NUMBER;
        t.len = (int)(p - t.start);
    } else if (isalpha((unsigned char)*p) || *p == '_') {
        while (isalnum((unsigned char)*p) || *p == '_')
            p++;
        t.kind = TK_WORD;
        t.len = (int)(p - t.start);
    } else {
        t.kind = TK_PUNCT;
        t.len = 1;
        p++;
    }
    *cursor = p;
    return t;
}

int count_words(const char *text)
{
    const char *cur = text;
    int words = 0;
    for (;;) {
        struct token t = next_token(&cur);
        if (t.kind == TK_END)
            break;
        if (t.kind == TK_WORD)
            words++;
    }
    return words;
}

const char *kind_name(enum token_kind k)
{
    switch (k) {
    case TK_WORD:
        return "word";
    case TK_NUMBER:
        return "number";
    case TK_PUNCT:
        return "punct";
    default:
        return "end";
    }
}

unsigned long hash_djb2(const char *s)
{
    unsigned long h = 5381;
    int c;
    while ((c = *s++) != 0)
        h = ((h << 5) + h) + (unsigned long)c;
    return h;
}

int find_char(const char *s, char c)
{
    int pos = -1;
    for (int i = 0; s[i] != '\0'; i++) {
        if (s[i] == c) {
            pos = i;
            goto done;
        }
    }
done:
    return pos;
}

void reverse_in_place(char *s)
{
    size_t n = strlen(s);
    for (size_t i = 0, j = n ? n - 1 : 0; i < j; i++, j--) {
        char tmp = s[i];
        s[i] = s[j];
        s[j] = tmp;
    }
}
