#pragma once

// Built-in default lexicons. The same content ships under data/.

#include <string_view>

namespace verilens::lexicon_data {

inline constexpr std::string_view kSentimentTsv = R"LEX(afraid	-2.2
agree	1.5
amazing	2.8
angry	-2.3
annoyed	-1.6
annoying	-1.7
attack	-2.1
awesome	3.1
awful	-2.0
bad	-2.5
beautiful	2.9
best	3.2
better	1.9
blame	-1.4
bored	-1.1
boring	-1.3
brilliant	2.8
broken	-2.1
celebrate	2.7
celebrating	2.7
congrats	2.4
congratulations	2.9
cool	1.3
crap	-1.6
crisis	-3.1
cry	-2.1
crying	-2.1
damn	-1.7
danger	-2.4
dangerous	-2.1
dead	-3.3
death	-2.9
disaster	-3.1
enjoy	2.2
enjoyed	2.3
excellent	3.2
excited	2.2
exciting	2.2
fail	-2.5
failed	-2.3
failure	-2.3
fake	-2.1
fantastic	2.6
favorite	2.0
fear	-2.2
free	2.3
fresh	1.3
fun	2.3
glad	2.0
good	1.9
grateful	2.0
great	3.1
happy	2.7
hate	-2.7
hated	-3.2
hates	-1.9
helpful	1.8
honored	2.2
hope	1.9
hopeful	1.6
horrible	-2.5
hurt	-2.4
impressive	2.3
inspired	2.2
inspiring	2.6
joy	2.8
kill	-3.7
killed	-3.5
kind	2.4
laugh	2.6
like	1.5
liked	1.8
lonely	-1.9
lose	-1.3
losing	-1.6
loss	-1.3
lost	-1.3
love	3.2
loved	2.9
lovely	2.8
loves	2.7
mad	-2.2
nice	1.8
pain	-2.3
peace	2.5
perfect	2.7
poor	-2.1
positive	2.6
problem	-1.7
problems	-1.7
proud	2.1
sad	-2.1
safe	1.9
scam	-2.5
scared	-2.2
sick	-2.3
smile	1.5
sorry	-0.3
spam	-1.5
strong	2.3
stupid	-2.4
success	2.7
successful	2.8
support	1.7
terrible	-2.1
thank	1.5
thanks	1.9
tired	-1.9
tragic	-3.4
ugly	-2.3
upset	-1.6
war	-2.9
welcome	2.0
win	2.8
winning	2.4
wins	2.7
won	2.7
wonderful	2.7
worried	-1.2
worry	-1.9
worse	-2.1
worst	-3.1
wow	2.8
wrong	-2.1
yes	1.7
)LEX";

inline constexpr std::string_view kPosTsv = R"LEX(a	article
about	preposition
above	preposition
across	preposition
after	preposition
again	adverb
against	preposition
almost	adverb
along	preposition
already	adverb
also	adverb
always	adverb
am	auxiliary_verb
among	preposition
an	article
anybody	impersonal_pronoun
anyone	impersonal_pronoun
anything	impersonal_pronoun
are	auxiliary_verb
aren't	auxiliary_verb
around	preposition
ask	verb
asks	verb
at	preposition
away	adverb
back	adverb
bad	adjective
be	auxiliary_verb
been	auxiliary_verb
before	preposition
behind	preposition
being	auxiliary_verb
below	preposition
best	adjective
better	adjective
between	preposition
beyond	preposition
big	adjective
by	preposition
call	verb
calls	verb
came	verb
can	auxiliary_verb
can't	auxiliary_verb
cannot	auxiliary_verb
check	verb
cold	adjective
come	verb
comes	verb
could	auxiliary_verb
couldn't	auxiliary_verb
did	auxiliary_verb
didn't	auxiliary_verb
different	adjective
do	auxiliary_verb
does	auxiliary_verb
doesn't	auxiliary_verb
don't	auxiliary_verb
down	preposition
during	preposition
early	adjective
easy	adjective
even	adverb
ever	adverb
everybody	impersonal_pronoun
everyone	impersonal_pronoun
everything	impersonal_pronoun
feel	verb
feels	verb
felt	verb
find	verb
finds	verb
follow	verb
for	preposition
free	adjective
from	preposition
full	adjective
gave	verb
get	verb
gets	verb
give	verb
gives	verb
go	verb
goes	verb
gone	verb
good	adjective
got	verb
great	adjective
had	auxiliary_verb
hadn't	auxiliary_verb
happy	adjective
hard	adjective
has	auxiliary_verb
hasn't	auxiliary_verb
have	auxiliary_verb
haven't	auxiliary_verb
having	auxiliary_verb
he	personal_pronoun
he's	personal_pronoun
help	verb
her	personal_pronoun
here	adverb
hers	personal_pronoun
herself	personal_pronoun
high	adjective
him	personal_pronoun
himself	personal_pronoun
his	personal_pronoun
hot	adjective
huge	adjective
i	personal_pronoun
i'll	personal_pronoun
i'm	personal_pronoun
i've	personal_pronoun
im	personal_pronoun
important	adjective
in	preposition
into	preposition
is	auxiliary_verb
isn't	auxiliary_verb
it	impersonal_pronoun
it's	impersonal_pronoun
its	impersonal_pronoun
itself	impersonal_pronoun
join	verb
just	adverb
keep	verb
keeps	verb
knew	verb
know	verb
knows	verb
late	adjective
let	verb
like	preposition
little	adjective
long	adjective
look	verb
looks	verb
love	verb
loves	verb
low	adjective
made	verb
make	verb
makes	verb
may	auxiliary_verb
maybe	adverb
me	personal_pronoun
might	auxiliary_verb
mine	personal_pronoun
must	auxiliary_verb
my	personal_pronoun
myself	personal_pronoun
near	preposition
need	verb
needs	verb
never	adverb
new	adjective
nice	adjective
nobody	impersonal_pronoun
not	adverb
nothing	impersonal_pronoun
now	adverb
of	preposition
off	preposition
often	adverb
old	adjective
on	preposition
only	adverb
open	adjective
other	adjective
our	personal_pronoun
ours	personal_pronoun
ourselves	personal_pronoun
over	preposition
own	adjective
per	preposition
perhaps	adverb
poor	adjective
put	verb
quite	adverb
rather	adverb
read	verb
real	adjective
really	adverb
rich	adjective
right	adjective
run	verb
runs	verb
sad	adjective
said	verb
same	adjective
saw	verb
say	verb
says	verb
see	verb
sees	verb
shall	auxiliary_verb
she	personal_pronoun
she's	personal_pronoun
short	adjective
should	auxiliary_verb
shouldn't	auxiliary_verb
since	preposition
small	adjective
so	adverb
somebody	impersonal_pronoun
someone	impersonal_pronoun
something	impersonal_pronoun
sometimes	adverb
soon	adverb
still	adverb
strong	adjective
sure	adjective
take	verb
takes	verb
tell	verb
tells	verb
than	preposition
that	impersonal_pronoun
that's	impersonal_pronoun
the	article
their	personal_pronoun
theirs	personal_pronoun
them	personal_pronoun
themselves	personal_pronoun
then	adverb
there	adverb
there's	impersonal_pronoun
these	impersonal_pronoun
they	personal_pronoun
they're	personal_pronoun
think	verb
thinks	verb
this	impersonal_pronoun
those	impersonal_pronoun
thought	verb
through	preposition
tiny	adjective
to	preposition
today	adverb
told	verb
tomorrow	adverb
tonight	adverb
too	adverb
took	verb
top	adjective
toward	preposition
towards	preposition
tries	verb
true	adjective
try	verb
u	personal_pronoun
under	preposition
until	preposition
up	preposition
upon	preposition
ur	personal_pronoun
us	personal_pronoun
use	verb
uses	verb
very	adverb
via	preposition
want	verb
wants	verb
was	auxiliary_verb
wasn't	auxiliary_verb
watch	verb
watched	verb
we	personal_pronoun
we'll	personal_pronoun
we're	personal_pronoun
we've	personal_pronoun
well	adverb
went	verb
were	auxiliary_verb
weren't	auxiliary_verb
what	impersonal_pronoun
whatever	impersonal_pronoun
which	impersonal_pronoun
who	impersonal_pronoun
whoever	impersonal_pronoun
whom	impersonal_pronoun
whose	impersonal_pronoun
will	auxiliary_verb
win	verb
with	preposition
within	preposition
without	preposition
won	verb
won't	auxiliary_verb
work	verb
works	verb
worse	adjective
worst	adjective
would	auxiliary_verb
wouldn't	auxiliary_verb
wrong	adjective
yesterday	adverb
yet	adverb
you	personal_pronoun
you'll	personal_pronoun
you're	personal_pronoun
you've	personal_pronoun
young	adjective
your	personal_pronoun
yours	personal_pronoun
yourself	personal_pronoun
yourselves	personal_pronoun
)LEX";

inline constexpr std::string_view kStopwords = R"LEX(a
about
above
after
again
against
all
am
amp
an
and
any
are
aren't
as
at
be
because
been
before
being
below
between
both
but
by
can
can't
cannot
could
couldn't
did
didn't
do
does
doesn't
doing
don't
down
during
each
few
for
from
further
get
got
had
hadn't
has
hasn't
have
haven't
having
he
he'd
he'll
he's
her
here
here's
hers
herself
him
himself
his
how
how's
i
i'd
i'll
i'm
i've
if
im
in
into
is
isn't
it
it's
its
itself
just
let's
me
more
most
mustn't
my
myself
no
nor
not
of
off
on
once
only
or
other
ought
our
ours
ourselves
out
over
own
rt
same
shan't
she
she'd
she'll
she's
should
shouldn't
so
some
such
than
that
that's
the
their
theirs
them
themselves
then
there
there's
these
they
they'd
they'll
they're
they've
this
those
through
to
too
u
under
until
up
ur
very
via
was
wasn't
we
we'd
we'll
we're
we've
were
weren't
what
what's
when
when's
where
where's
which
while
who
who's
whom
why
why's
will
with
won't
would
wouldn't
you
you'd
you'll
you're
you've
your
yours
yourself
yourselves
)LEX";

}  // namespace verilens::lexicon_data
